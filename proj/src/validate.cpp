#include "corrbandit/validate.hpp"

#include "corrbandit/config.hpp"
#include "corrbandit/sim.hpp"

#include <cmath>
#include <functional>
#include <sstream>

namespace corrbandit {

namespace {

CheckResult check(std::string name, const std::function<std::string()>& body) {
  CheckResult r{std::move(name), false, {}};
  try {
    r.detail = body();
    r.passed = r.detail.empty();
  } catch (const std::exception& e) {
    r.detail = std::string("exception: ") + e.what();
  }
  return r;
}

std::vector<ScalarizationSpec> sample_specs(int d) {
  return {ScalarizationSpec::linear(RewardVector::Constant(d, 1.0 / d)),
          ScalarizationSpec::chebyshev(d), ScalarizationSpec::logsumexp(d, 5.0)};
}

std::string scalarization_properties() {
  Stream rng(7);
  for (int d = 1; d <= 4; ++d) {
    for (const auto& spec : sample_specs(d)) {
      for (int i = 0; i < 500; ++i) {
        RewardVector x(d), y(d);
        for (int c = 0; c < d; ++c) {
          x(c) = rng.uniform();
          y(c) = rng.uniform();
        }
        const RewardVector hi = x.cwiseMax(y);
        if (evaluate(spec, x) > evaluate(spec, hi) + 1e-12) return spec.name() + ": not monotone";
        const double lhs = std::abs(evaluate(spec, x) - evaluate(spec, y));
        if (lhs > lipschitz(spec) * (x - y).cwiseAbs().maxCoeff() + 1e-9)
          return spec.name() + ": Lipschitz bound violated";
        const double r = rng.uniform(0.0, 0.5);
        const RewardVector corner = (x.array() + r).min(1.0).matrix();
        if (optimistic_index(spec, x, r) + 1e-12 < evaluate(spec, corner.cwiseMin(y.cwiseMax(x))))
          return spec.name() + ": optimistic index below a rectangle point";
      }
    }
  }
  return {};
}

EpisodeConfig small_episode(ProtocolKind kind, int N, std::uint64_t seed) {
  EpisodeConfig c;
  c.K = 5;
  c.d = 2;
  c.N = N;
  c.T = 200;
  c.gamma = 0.1 * N * c.T;
  c.protocol = kind;
  c.adversary = GreedyFlip{1.0};
  c.scalarization = ScalarizationSpec::linear(RewardVector::Constant(2, 0.5));
  c.master_seed = seed;
  return c;
}

std::string episode_identities() {
  const ProtocolKind kinds[] = {ProtocolKind::s1(), ProtocolKind::s2(), ProtocolKind::s3(false),
                                ProtocolKind::s3(true)};
  for (const auto& kind : kinds) {
    for (int N : {1, 2, 4}) {
      EpisodeConfig c = small_episode(kind, N, 11 + N);
      if (kind.certified) c.nu = 40;
      // run_episode audits budgets, nonexpansiveness, the effective-corruption identity
      // and the regret identity; any violation throws.
      const auto r = run_episode(c);
      const double rho = kind.mode == SharingMode::RawAppendAll ? N : 1.0;
      if (std::abs(r.summary.gamma_eff - rho * r.summary.gamma_spent) >
          1e-12 * std::max(1.0, r.summary.gamma_eff)) {
        return kind.name() + ": effective corruption identity off";
      }
    }
  }
  return {};
}

std::string negative_audit() {
  RoundRecord rec;
  rec.round = 1;
  AgentStep s;
  s.arm = 0;
  s.clean = RewardVector::Constant(1, 1.0);
  s.observed = RewardVector::Constant(1, 0.0);
  s.c_norm = 1.0;
  rec.agents.push_back(s);
  CorruptionEvent e{0, 1, 0, RewardVector::Constant(1, -1.0), 1.0};
  std::vector<RoundRecord> records{rec};
  std::vector<CorruptionEvent> events{e};
  AuditInput in;
  in.records = records;
  in.events = events;
  in.gamma = 0.5;
  if (audit(in).passed) return "over-budget record passed the audit";
  return {};
}

std::string determinism() {
  EpisodeConfig c = small_episode(ProtocolKind::s2(), 3, 99);
  const auto a = run_episode(c);
  const auto b = run_episode(c);
  if (a.summary.team_regret != b.summary.team_regret || a.summary.team_pulls != b.summary.team_pulls ||
      a.summary.gamma_spent != b.summary.gamma_spent)
    return "identical configs produced different summaries";

  std::vector<EpisodeConfig> grid{small_episode(ProtocolKind::s1(), 2, 5),
                                  small_episode(ProtocolKind::s3(false), 2, 5)};
  auto strip = [](SweepResult r) {
    std::ostringstream os;
    for (auto& row : r.rows) {
      row.wall_ms = 0.0;
      os << csv_row(row) << '\n';
    }
    return os.str();
  };
  if (strip(run_sweep(grid, 3, 1)) != strip(run_sweep(grid, 3, 4)))
    return "sweep output depends on the worker count";
  return {};
}

}  // namespace

std::vector<CheckResult> run_quick_validation() {
  return {
      check("scalarization monotone, Lipschitz, corner", scalarization_properties),
      check("episode audits and effective corruption", episode_identities),
      check("over-budget record fails audit", negative_audit),
      check("determinism across runs and workers", determinism),
  };
}

}  // namespace corrbandit
