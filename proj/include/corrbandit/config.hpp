#pragma once

// JSON configuration, CSV rows and trace output.

#include "corrbandit/sim.hpp"

#include <json.hpp>

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace corrbandit {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Json = nlohmann::json;

// Parses a file into JSON. IoError when unreadable, ConfigError("", ...) on a syntax error.
Json load_json_file(const std::string& path);

ScalarizationSpec scalarization_from_json(const Json& j, int d, const std::string& path);
Json to_json(const ScalarizationSpec& spec);

AdversaryStrategy adversary_from_json(const Json& j, const std::string& path);
Json to_json(const AdversaryStrategy& strategy);

// {"means":[[...],...]}
Instance instance_from_json(const Json& j, const std::string& path);
Json to_json(const Instance& instance);

// Keys: K d N T gamma protocol adversary scalarization policy instance master_seed rep.
// Unknown keys are rejected with the offending JSON pointer.
EpisodeConfig episode_from_json(const Json& j, const std::string& path = "");
Json to_json(const EpisodeConfig& cfg);

// {"base":{...}, "points":[{...},...]}: each point is merge-patched onto base.
// A plain episode object is a one-point grid.
std::vector<EpisodeConfig> grid_from_json(const Json& j);

// 9 significant digits, shortest form, independent of the global locale.
std::string format_double(double v);

inline constexpr const char* kCsvHeader =
    "protocol,adversary,K,d,N,T,gamma,nu,scalarization,master_seed,rep,team_regret,"
    "gamma_spent,gamma_eff,nu_spent,commit_round,wall_ms";

std::string csv_row(const ResultRow& row);
void write_csv(std::ostream& os, std::span<const ResultRow> rows);

// One NDJSON object: the round's agent steps and the messages broadcast at its end.
void write_trace_line(std::ostream& os, const RoundRecord& record, std::span<const Message> messages);

Json figure_meta(const FigurePreset& preset, const FigureOptions& options);

}  // namespace corrbandit
