#pragma once

#include "corrbandit/adversary.hpp"
#include "corrbandit/env.hpp"
#include "corrbandit/metrics.hpp"
#include "corrbandit/policy.hpp"
#include "corrbandit/protocol.hpp"
#include "corrbandit/scalarize.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace corrbandit {

struct UniformInstanceParams {
  double delta_min_floor = 0.05;
};

struct PlantedInstanceParams {
  double best_level = 0.85;
  double rest_low = 0.2;
  double rest_high = 0.55;
};

// Either a pinned instance or a recipe drawn from the episode's instance stream.
using InstanceSource = std::variant<Instance, UniformInstanceParams, PlantedInstanceParams>;

struct EpisodeConfig {
  int K = 10;
  int d = 3;
  int N = 5;
  int T = 4000;
  double gamma = 0.0;
  std::int64_t nu = 0;
  ProtocolKind protocol = ProtocolKind::s2();
  AdversaryStrategy adversary = NoCorruption{};
  ScalarizationSpec scalarization;
  double delta = 0.01;
  bool known_budget = true;
  InstanceSource instance = UniformInstanceParams{};
  std::uint64_t master_seed = 0;
  int grid_index = 0;
  int rep = 0;
};

// Throws ContractViolation on inconsistent dimensions or out-of-range parameters.
void validate(const EpisodeConfig& cfg);

PolicyConfig policy_config_for(const EpisodeConfig& cfg);
ProblemDims dims_of(const EpisodeConfig& cfg);
std::uint64_t episode_seed(const EpisodeConfig& cfg);
Instance resolve_instance(const EpisodeConfig& cfg);

struct RoundContext {
  Round round = 0;
  const Instance* instance = nullptr;
  const GapProfile* gaps = nullptr;
  const ScalarizationSpec* spec = nullptr;
  const PolicyConfig* policy = nullptr;
  ProblemDims dims;
  const ProtocolState* protocol = nullptr;
  // Latest verified certificate per arm (certified S3 only; empty otherwise).
  std::span<const std::optional<Certificate>> certificates;
  std::optional<ArmIndex> committed_arm;
};

// Hook invoked at the end of every round, after messages are ingested.
class RoundObserver {
 public:
  virtual ~RoundObserver() = default;
  virtual void on_round_end(const RoundContext& ctx) = 0;
};

struct EpisodeOptions {
  bool keep_records = false;
  std::ostream* trace = nullptr;  // newline-delimited JSON, one object per round
  RoundObserver* observer = nullptr;
};

struct EpisodeResult {
  EpisodeSummary summary;
  Instance instance;
  GapProfile gaps;
  std::vector<RoundRecord> records;  // filled when keep_records
  std::vector<CorruptionEvent> events;
  double wall_ms = 0.0;
};

// Runs rounds 1..T. Deterministic in cfg. Throws AuditFailure if the finished episode
// violates a budget or an accounting identity.
EpisodeResult run_episode(const EpisodeConfig& cfg, const EpisodeOptions& options = {});

// One CSV row per episode.
struct ResultRow {
  int grid_index = 0;
  std::string protocol;
  std::string adversary;
  int K = 0, d = 0, N = 0, T = 0;
  double gamma = 0.0;
  std::int64_t nu = 0;
  std::string scalarization;
  std::uint64_t master_seed = 0;
  int rep = 0;
  double team_regret = 0.0;
  double gamma_spent = 0.0;
  double gamma_eff = 0.0;
  std::int64_t nu_spent = 0;
  std::optional<Round> commit_round;
  std::optional<ArmIndex> committed_arm;
  ArmIndex best_arm = 0;
  double wall_ms = 0.0;
};

ResultRow make_row(const EpisodeConfig& cfg, const EpisodeResult& result);

struct GridPointSummary {
  int grid_index = 0;
  int reps = 0;
  double mean_regret = 0.0;
  double stderr_regret = 0.0;
  double commit_fraction = 0.0;       // replications with commit_round < T
  double correct_commit_fraction = 0.0;  // ... that committed to the best arm
  std::optional<double> mean_commit_round;
};

struct SweepFailure {
  int grid_index = 0;
  int rep = 0;
  std::string what;
};

struct SweepResult {
  std::vector<ResultRow> rows;  // sorted by (grid_index, rep)
  std::vector<GridPointSummary> summaries;
  std::vector<SweepFailure> failures;
  bool ok() const noexcept { return failures.empty(); }
};

// Replicates every grid point `reps` times on a pool of `workers` threads. Grid point i runs
// with grid_index = i and rep = 0..reps-1; output order does not depend on `workers`.
SweepResult run_sweep(std::span<const EpisodeConfig> grid, int reps, int workers);

std::vector<GridPointSummary> summarize(std::span<const ResultRow> rows);

struct FigureOptions {
  bool paper_scale = false;
  std::optional<int> reps;
  std::uint64_t master_seed = 20260101;
};

struct FigurePreset {
  std::string name;
  std::vector<EpisodeConfig> grid;
  int reps = 20;
  Instance instance;
  GapProfile gaps;
  std::vector<double> gamma_fractions;  // Gamma = fraction * N * T
  std::int64_t nu_star = 0;             // fig3 only
  std::vector<std::int64_t> nu_grid;    // fig3 only
};

// fig1 | fig2 | fig3. Throws ConfigError for other names.
FigurePreset figure_preset(const std::string& name, const FigureOptions& options = {});

}  // namespace corrbandit
