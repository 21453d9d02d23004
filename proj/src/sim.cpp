#include "corrbandit/sim.hpp"

#include "corrbandit/config.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

namespace corrbandit {

void validate(const EpisodeConfig& cfg) {
  if (cfg.K < 2) throw ContractViolation("episode: K must be >= 2");
  if (cfg.d < 1) throw ContractViolation("episode: d must be >= 1");
  if (cfg.N < 1) throw ContractViolation("episode: N must be >= 1");
  if (cfg.T < 1) throw ContractViolation("episode: T must be >= 1");
  if (!(cfg.gamma >= 0.0) || !std::isfinite(cfg.gamma))
    throw ContractViolation("episode: gamma must be finite and >= 0");
  if (cfg.nu < 0) throw ContractViolation("episode: nu must be >= 0");
  if (cfg.scalarization.dim() != cfg.d)
    throw ContractViolation("episode: scalarization dimension does not match d");
  if (const auto* inst = std::get_if<Instance>(&cfg.instance)) {
    if (inst->num_arms() != cfg.K || inst->dim() != cfg.d)
      throw ContractViolation("episode: pinned instance shape does not match (K, d)");
  }
  validate(cfg.adversary);
  if (const auto* e = std::get_if<EarlyInformative>(&cfg.adversary))
    if (e->target_arm && *e->target_arm >= cfg.K)
      throw ContractViolation("episode: early_informative target arm out of range");
  validate(policy_config_for(cfg));
}

PolicyConfig policy_config_for(const EpisodeConfig& cfg) {
  PolicyConfig p;
  p.delta = cfg.delta;
  p.known_budget = cfg.known_budget;
  p.gamma = cfg.gamma;
  p.nu = cfg.nu;
  p.certified = cfg.protocol.mode == SharingMode::RecommendOnly && cfg.protocol.certified;
  return p;
}

ProblemDims dims_of(const EpisodeConfig& cfg) { return {cfg.d, cfg.K, cfg.N, cfg.T}; }

std::uint64_t episode_seed(const EpisodeConfig& cfg) {
  return derive_seed(cfg.master_seed,
                     {static_cast<std::uint64_t>(StreamPurpose::Episode),
                      static_cast<std::uint64_t>(cfg.grid_index),
                      static_cast<std::uint64_t>(cfg.rep)});
}

Instance resolve_instance(const EpisodeConfig& cfg) {
  Stream rng(derive_seed(cfg.master_seed,
                         {static_cast<std::uint64_t>(StreamPurpose::Instance),
                          static_cast<std::uint64_t>(cfg.grid_index),
                          static_cast<std::uint64_t>(cfg.rep)}));
  struct Resolver {
    const EpisodeConfig& cfg;
    Stream& rng;
    Instance operator()(const Instance& fixed) const { return fixed; }
    Instance operator()(const UniformInstanceParams& p) const {
      return generate_instance(cfg.K, cfg.d, p.delta_min_floor, cfg.scalarization, rng);
    }
    Instance operator()(const PlantedInstanceParams& p) const {
      return planted_instance(cfg.K, cfg.d, p.best_level, p.rest_low, p.rest_high, rng);
    }
  };
  return std::visit(Resolver{cfg, rng}, cfg.instance);
}

EpisodeResult run_episode(const EpisodeConfig& cfg, const EpisodeOptions& options) {
  validate(cfg);
  const auto started = std::chrono::steady_clock::now();

  EpisodeResult result{EpisodeSummary{}, resolve_instance(cfg), GapProfile{}, {}, {}, 0.0};
  const Instance& instance = result.instance;
  result.gaps = compute_gaps(instance, cfg.scalarization);
  const GapProfile& gaps = result.gaps;
  const ScalarizationSpec& spec = cfg.scalarization;
  const PolicyConfig policy = policy_config_for(cfg);
  const ProblemDims dims = dims_of(cfg);
  const std::uint64_t seed = episode_seed(cfg);
  const int N = cfg.N;
  const int K = cfg.K;
  const bool shared_estimator = cfg.protocol.mode == SharingMode::SyncStats;
  const bool recommend_only = cfg.protocol.mode == SharingMode::RecommendOnly;

  ProtocolState proto(cfg.protocol, N, K, cfg.d);
  BudgetLedger budget(cfg.gamma);
  const TranscriptView view{&gaps, K};

  std::vector<RoundRecord> records;
  records.reserve(cfg.T);
  auto& events = result.events;
  CountVector scheduled_verified = CountVector::Zero(K);
  std::int64_t nu_spent = 0;
  std::optional<ArmIndex> committed;
  std::optional<Round> commit_round;
  std::vector<std::optional<Certificate>> certs(K);
  std::vector<AgentObservation> observations(N);
  std::vector<Recommendation> recommendations(N);

  auto stream_for = [seed](StreamPurpose purpose, AgentIndex n, Round t) {
    return Stream(derive_seed(seed, {static_cast<std::uint64_t>(purpose),
                                     static_cast<std::uint64_t>(n),
                                     static_cast<std::uint64_t>(t)}));
  };
  auto choose = [&](AgentIndex n) {
    const auto& est = proto.estimator_for(n);
    const auto radii = radii_for(policy, cfg.protocol, est, dims);
    return select_arm(est, spec, radii);
  };

  for (Round t = 1; t <= cfg.T; ++t) {
    RoundRecord rec;
    rec.round = t;
    rec.committed = committed.has_value();
    rec.agents.resize(N);

    // Decisions use only what was ingested through round t-1.
    std::optional<ArmIndex> shared_choice;
    for (AgentIndex n = 0; n < N; ++n) {
      ArmIndex arm = 0;
      bool verify = false;
      if (committed) {
        arm = *committed;
      } else if (auto v = schedule_verification(policy, scheduled_verified, nu_spent); v.verify) {
        verify = true;
        arm = *v.forced_arm;
        scheduled_verified(arm) += 1;
        ++nu_spent;
      } else if (shared_estimator) {
        if (!shared_choice) shared_choice = choose(n);
        arm = *shared_choice;
      } else {
        arm = choose(n);
      }

      Stream env = stream_for(StreamPurpose::Environment, n, t);
      RewardVector clean = sample_reward(instance, arm, env);
      Stream adv = stream_for(StreamPurpose::Adversary, n, t);
      auto event = decide_corruption(cfg.adversary, budget, view, n, t, arm, verify, clean, adv);
      RewardVector observed = apply_corruption(clean, event);

      auto& step = rec.agents[n];
      step.arm = arm;
      step.verified = verify;
      step.c_norm = event ? event->c_norm : 0.0;
      step.clean = std::move(clean);
      step.observed = observed;
      observations[n] = AgentObservation{n, arm, verify, std::move(observed)};
      if (event) events.push_back(std::move(*event));
    }

    proto.observe_local(t, observations);

    if (recommend_only) {
      const auto& pool = proto.verified_pool();
      for (AgentIndex n = 0; n < N; ++n) {
        const ArmIndex m = choose(n);
        std::optional<Certificate> cert;
        if (policy.certified && pool.verified_count(m) >= 1)
          cert = verified_certificate(spec, m, pool.verified_sums().row(m).transpose(),
                                      pool.verified_count(m), dims, policy.delta);
        recommendations[n] = Recommendation{m, cert};
      }
    }
    const auto messages = emit_messages(proto, t, observations, recommendations);
    ingest_messages(proto, t, messages);

    if (policy.certified) {
      const auto& pool = proto.verified_pool();
      for (ArmIndex k = 0; k < K; ++k) {
        if (pool.verified_count(k) >= 1)
          certs[k] = verified_certificate(spec, k, pool.verified_sums().row(k).transpose(),
                                          pool.verified_count(k), dims, policy.delta);
      }
      if (!committed) {
        const auto filtered = filter_and_commit(certs);
        if (filtered.committed) {
          committed = filtered.committed;
          commit_round = t;
        }
      }
    }

    if (options.trace) write_trace_line(*options.trace, rec, messages);
    if (options.observer) {
      RoundContext ctx;
      ctx.round = t;
      ctx.instance = &instance;
      ctx.gaps = &gaps;
      ctx.spec = &spec;
      ctx.policy = &policy;
      ctx.dims = dims;
      ctx.protocol = &proto;
      if (policy.certified) ctx.certificates = certs;
      ctx.committed_arm = committed;
      options.observer->on_round_end(ctx);
    }
    records.push_back(std::move(rec));
  }

  AuditInput audit_in;
  audit_in.records = records;
  audit_in.events = events;
  audit_in.inclusion = &proto.ledger();
  audit_in.protocol = cfg.protocol;
  audit_in.num_agents = N;
  audit_in.gamma = cfg.gamma;
  audit_in.nu = cfg.nu;
  audit_in.gaps = &gaps;
  const AuditReport report = audit(audit_in);
  require_passing(report);

  auto& s = result.summary;
  s.team_pulls = team_pull_counts(records, K);
  s.team_regret = team_regret(records, gaps);
  s.regret_curve = regret_curve(records, gaps);
  s.gamma_spent = budget.gamma_spent();
  const auto eff = effective_corruption(proto.ledger(), events);
  s.gamma_eff = eff.total;
  s.gamma_eff_per_arm = eff.per_arm;
  s.nu_spent = report.nu_spent;
  s.commit_round = commit_round;
  s.committed_arm = committed;

  if (options.keep_records) result.records = std::move(records);
  result.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return result;
}

ResultRow make_row(const EpisodeConfig& cfg, const EpisodeResult& result) {
  ResultRow row;
  row.grid_index = cfg.grid_index;
  row.protocol = cfg.protocol.name();
  row.adversary = adversary_name(cfg.adversary);
  row.K = cfg.K;
  row.d = cfg.d;
  row.N = cfg.N;
  row.T = cfg.T;
  row.gamma = cfg.gamma;
  row.nu = cfg.nu;
  row.scalarization = cfg.scalarization.name();
  row.master_seed = cfg.master_seed;
  row.rep = cfg.rep;
  row.team_regret = result.summary.team_regret;
  row.gamma_spent = result.summary.gamma_spent;
  row.gamma_eff = result.summary.gamma_eff;
  row.nu_spent = result.summary.nu_spent;
  row.commit_round = result.summary.commit_round;
  row.committed_arm = result.summary.committed_arm;
  row.best_arm = result.gaps.best_arm;
  row.wall_ms = result.wall_ms;
  return row;
}

std::vector<GridPointSummary> summarize(std::span<const ResultRow> rows) {
  std::map<int, std::vector<const ResultRow*>> groups;
  for (const auto& r : rows) groups[r.grid_index].push_back(&r);

  std::vector<GridPointSummary> out;
  for (const auto& [index, members] : groups) {
    GridPointSummary g;
    g.grid_index = index;
    g.reps = static_cast<int>(members.size());
    double sum = 0.0;
    for (const auto* r : members) sum += r->team_regret;
    g.mean_regret = sum / g.reps;
    double ss = 0.0;
    for (const auto* r : members) ss += (r->team_regret - g.mean_regret) * (r->team_regret - g.mean_regret);
    g.stderr_regret = g.reps > 1 ? std::sqrt(ss / (g.reps - 1) / g.reps) : 0.0;

    int committed = 0;
    int correct = 0;
    double commit_sum = 0.0;
    for (const auto* r : members) {
      if (r->commit_round && *r->commit_round < r->T) {
        ++committed;
        commit_sum += *r->commit_round;
        if (r->committed_arm && *r->committed_arm == r->best_arm) ++correct;
      }
    }
    g.commit_fraction = static_cast<double>(committed) / g.reps;
    g.correct_commit_fraction = static_cast<double>(correct) / g.reps;
    if (committed > 0) g.mean_commit_round = commit_sum / committed;
    out.push_back(g);
  }
  return out;
}

SweepResult run_sweep(std::span<const EpisodeConfig> grid, int reps, int workers) {
  if (reps < 1) throw ContractViolation("run_sweep: reps must be >= 1");
  workers = std::max(1, workers);
  const std::size_t tasks = grid.size() * static_cast<std::size_t>(reps);

  std::vector<std::optional<ResultRow>> slots(tasks);
  std::vector<SweepFailure> failures;
  std::mutex failure_mutex;
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    for (std::size_t task = next++; task < tasks; task = next++) {
      EpisodeConfig cfg = grid[task / reps];
      cfg.grid_index = static_cast<int>(task / reps);
      cfg.rep = static_cast<int>(task % reps);
      try {
        slots[task] = make_row(cfg, run_episode(cfg));
      } catch (const std::exception& e) {
        std::lock_guard lock(failure_mutex);
        failures.push_back({cfg.grid_index, cfg.rep, e.what()});
      }
    }
  };

  const int threads = static_cast<int>(std::min<std::size_t>(workers, std::max<std::size_t>(1, tasks)));
  if (threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (int i = 0; i < threads; ++i) pool.emplace_back(work);
  }

  SweepResult out;
  for (auto& s : slots)
    if (s) out.rows.push_back(std::move(*s));
  std::sort(failures.begin(), failures.end(), [](const auto& a, const auto& b) {
    return std::tie(a.grid_index, a.rep) < std::tie(b.grid_index, b.rep);
  });
  out.failures = std::move(failures);
  out.summaries = summarize(out.rows);
  return out;
}

// ---------------------------------------------------------------------------
// Figure presets

namespace {

struct PresetScale {
  int K, d, T, reps;
  std::vector<int> agents;
};

PresetScale scale_for(const FigureOptions& o) {
  if (o.paper_scale) return {20, 5, 10'000, 50, {5, 10, 20}};
  return {10, 3, 4000, 20, {2, 5, 10}};
}

const std::vector<double> kGammaFractions = {0.0, 0.005, 0.01, 0.02, 0.04};

Instance pinned_instance(const PresetScale& sc, const FigureOptions& o) {
  Stream rng(derive_seed(o.master_seed, {static_cast<std::uint64_t>(StreamPurpose::Instance),
                                         static_cast<std::uint64_t>(sc.K),
                                         static_cast<std::uint64_t>(sc.d)}));
  const PlantedInstanceParams p;
  return planted_instance(sc.K, sc.d, p.best_level, p.rest_low, p.rest_high, rng);
}

EpisodeConfig base_config(const PresetScale& sc, const Instance& instance, const FigureOptions& o) {
  EpisodeConfig c;
  c.K = sc.K;
  c.d = sc.d;
  c.T = sc.T;
  c.scalarization = ScalarizationSpec::linear(RewardVector::Constant(sc.d, 1.0 / sc.d));
  c.instance = instance;
  c.master_seed = o.master_seed;
  return c;
}

}  // namespace

FigurePreset figure_preset(const std::string& name, const FigureOptions& options) {
  if (name != "fig1" && name != "fig2" && name != "fig3")
    throw ConfigError("/figure", "unknown figure preset '" + name + "' (expected fig1|fig2|fig3)");

  const PresetScale sc = scale_for(options);
  FigurePreset preset{name, {}, options.reps.value_or(sc.reps), pinned_instance(sc, options),
                      GapProfile{}, {}, 0, {}};
  const EpisodeConfig base = base_config(sc, preset.instance, options);
  preset.gaps = compute_gaps(preset.instance, base.scalarization);

  if (name == "fig1" || name == "fig2") {
    preset.gamma_fractions = kGammaFractions;
    const std::vector<ProtocolKind> protocols =
        name == "fig1" ? std::vector{ProtocolKind::s1(), ProtocolKind::s2()}
                       : std::vector{ProtocolKind::s2(), ProtocolKind::s3(false)};
    for (int n : sc.agents)
      for (const auto& proto : protocols)
        for (double f : kGammaFractions) {
          EpisodeConfig c = base;
          c.N = n;
          c.protocol = proto;
          c.gamma = f * n * sc.T;
          c.adversary = GreedyFlip{1.0};
          c.known_budget = true;
          preset.grid.push_back(c);
        }
    return preset;
  }

  // fig3: high corruption, verification budget swept around the derived threshold. Known-budget
  // radii would exceed 1/4 for every arm at Gamma = NT/4, so the learners run agnostic.
  const int n = sc.agents.size() > 1 ? sc.agents[1] : sc.agents[0];
  EpisodeConfig high = base;
  high.N = n;
  high.gamma = 0.25 * n * sc.T;
  high.adversary = EarlyInformative{};
  high.known_budget = false;
  preset.nu_star = derived_nu_threshold(dims_of(high), high.delta, lipschitz(high.scalarization),
                                        preset.gaps.delta_min);
  const std::int64_t s = preset.nu_star;
  preset.nu_grid = {0, s / 8, s / 4, s / 2, s, 2 * s, 4 * s};
  for (const auto& proto : {ProtocolKind::s3(true), ProtocolKind::s3(false)})
    for (std::int64_t nu : preset.nu_grid) {
      EpisodeConfig c = high;
      c.protocol = proto;
      c.nu = nu;
      preset.grid.push_back(c);
    }
  return preset;
}

}  // namespace corrbandit
