// corrbandit: run episodes, sweeps and figure presets; emit CSV + JSON.
//
// Exit codes: 0 ok, 1 usage / bad config, 2 validation or audit failure, 3 IO.

#include "corrbandit/config.hpp"
#include "corrbandit/sim.hpp"
#include "corrbandit/validate.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

using namespace corrbandit;

namespace {

enum Exit { kOk = 0, kUsage = 1, kValidation = 2, kIo = 3 };

std::optional<std::uint64_t> seed_override() {
  const char* s = std::getenv("CORRBANDIT_SEED");
  if (!s || !*s) return std::nullopt;
  char* end = nullptr;
  const auto v = std::strtoull(s, &end, 10);
  if (*end != '\0') throw ConfigError("$CORRBANDIT_SEED", "expected a non-negative integer");
  return v;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path);
  return os;
}

void report_failures(const SweepResult& res) {
  for (const auto& f : res.failures)
    std::cerr << "episode (grid " << f.grid_index << ", rep " << f.rep << ") failed: " << f.what << '\n';
}

void print_summaries(const std::vector<EpisodeConfig>& grid, const SweepResult& res) {
  for (const auto& s : res.summaries) {
    const auto& c = grid[s.grid_index];
    std::cout << c.protocol.name() << " N=" << c.N << " gamma=" << format_double(c.gamma)
              << " nu=" << c.nu << "  regret " << format_double(s.mean_regret) << " +- "
              << format_double(s.stderr_regret) << "  commit " << format_double(s.commit_fraction)
              << '\n';
  }
}

int cmd_run(const std::string& config, const std::string& trace, const std::string& out) {
  auto grid = grid_from_json(load_json_file(config));
  if (grid.size() != 1) throw ConfigError("/points", "run takes a single episode; use sweep for grids");
  EpisodeConfig cfg = grid.front();
  if (auto s = seed_override()) cfg.master_seed = *s;

  std::ofstream trace_os;
  EpisodeOptions opts;
  if (!trace.empty()) {
    trace_os = open_out(trace);
    opts.trace = &trace_os;
  }
  const auto result = run_episode(cfg, opts);
  const ResultRow row = make_row(cfg, result);
  if (out.empty()) {
    write_csv(std::cout, std::span(&row, 1));
  } else {
    auto os = open_out(out);
    write_csv(os, std::span(&row, 1));
    if (!os) throw IoError("write failed: " + out);
  }
  return kOk;
}

int cmd_sweep(const std::string& config, int reps, int workers, const std::string& out) {
  auto grid = grid_from_json(load_json_file(config));
  if (auto s = seed_override())
    for (auto& c : grid) c.master_seed = *s;
  const auto res = run_sweep(grid, reps, workers);
  auto os = open_out(out);
  write_csv(os, res.rows);  // partial results are flushed even when some episodes failed
  if (!os) throw IoError("write failed: " + out);
  report_failures(res);
  return res.ok() ? kOk : kValidation;
}

int cmd_figure(const std::string& name, const std::string& dir, std::optional<int> reps, bool paper_scale,
               int workers) {
  FigureOptions fo;
  fo.paper_scale = paper_scale;
  fo.reps = reps;
  if (auto s = seed_override()) fo.master_seed = *s;
  const FigurePreset preset = figure_preset(name, fo);

  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
  const std::filesystem::path base(dir);

  const auto res = run_sweep(preset.grid, preset.reps, workers);
  {
    auto os = open_out((base / (name + ".csv")).string());
    write_csv(os, res.rows);
    if (!os) throw IoError("write failed");
  }
  const std::string meta = figure_meta(preset, fo).dump(2) + "\n";
  for (const auto& file : {std::string("meta.json"), name + "_meta.json"}) {
    auto os = open_out((base / file).string());
    os << meta;
    if (!os) throw IoError("write failed");
  }
  print_summaries(preset.grid, res);
  report_failures(res);
  return res.ok() ? kOk : kValidation;
}

int cmd_validate() {
  bool ok = true;
  for (const auto& r : run_quick_validation()) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name;
    if (!r.passed) std::cout << ": " << r.detail;
    std::cout << '\n';
    ok = ok && r.passed;
  }
  return ok ? kOk : kValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative multi-objective bandits under corruption and verification budgets"};
  app.require_subcommand(1);
  const int default_workers = std::max(1u, std::thread::hardware_concurrency());

  std::string config, trace, out, figure_name, dir;
  int reps = 1;
  int workers = default_workers;
  std::optional<int> figure_reps;
  bool paper_scale = false;

  auto* run = app.add_subcommand("run", "Run one episode");
  run->add_option("--config", config, "Episode JSON")->required();
  run->add_option("--trace", trace, "Write a per-round NDJSON trace");
  run->add_option("--out", out, "CSV output (default stdout)");

  auto* sweep = app.add_subcommand("sweep", "Replicate every point of a grid");
  sweep->add_option("--config", config, "Grid JSON")->required();
  sweep->add_option("--reps", reps, "Replications per grid point")->check(CLI::PositiveNumber);
  sweep->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  sweep->add_option("--out", out, "CSV output")->required();

  auto* figure = app.add_subcommand("figure", "Run a figure preset");
  figure->add_option("name", figure_name, "fig1 | fig2 | fig3")->required();
  figure->add_option("--out", dir, "Output directory")->required();
  figure->add_option("--reps", figure_reps, "Override replications")->check(CLI::PositiveNumber);
  figure->add_flag("--paper-scale", paper_scale, "K=20, d=5, T=10^4, 50 reps");
  figure->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);

  auto* validate = app.add_subcommand("validate", "Run the quick property and audit suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (run->parsed()) return cmd_run(config, trace, out);
    if (sweep->parsed()) return cmd_sweep(config, reps, workers, out);
    if (figure->parsed()) return cmd_figure(figure_name, dir, figure_reps, paper_scale, workers);
    if (validate->parsed()) return cmd_validate();
  } catch (const ConfigError& e) {
    std::cerr << "config error at " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kIo;
  } catch (const AuditFailure& e) {
    std::cerr << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  }
  return kUsage;
}
