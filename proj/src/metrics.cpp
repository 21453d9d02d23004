#include "corrbandit/metrics.hpp"

#include <cmath>
#include <sstream>

namespace corrbandit {

double team_regret(std::span<const RoundRecord> records, const GapProfile& gaps) {
  long double total = 0.0L;
  for (const auto& r : records)
    for (const auto& a : r.agents) total += gaps.theta[gaps.best_arm] - gaps.theta.at(a.arm);
  return static_cast<double>(total);
}

double team_regret_from_counts(std::span<const std::int64_t> team_pulls, const GapProfile& gaps) {
  long double total = 0.0L;
  for (std::size_t k = 0; k < team_pulls.size(); ++k) {
    if (static_cast<ArmIndex>(k) == gaps.best_arm) continue;
    total += static_cast<long double>(gaps.gaps.at(k)) * team_pulls[k];
  }
  return static_cast<double>(total);
}

std::vector<std::int64_t> team_pull_counts(std::span<const RoundRecord> records, int num_arms) {
  std::vector<std::int64_t> counts(num_arms, 0);
  for (const auto& r : records)
    for (const auto& a : r.agents) counts.at(a.arm) += 1;
  return counts;
}

std::vector<double> regret_curve(std::span<const RoundRecord> records, const GapProfile& gaps) {
  std::vector<double> curve;
  curve.reserve(records.size());
  long double running = 0.0L;
  for (const auto& r : records) {
    for (const auto& a : r.agents) running += gaps.theta[gaps.best_arm] - gaps.theta.at(a.arm);
    curve.push_back(static_cast<double>(running));
  }
  return curve;
}

namespace {

bool close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

AuditReport audit(const AuditInput& in) {
  AuditReport rep;
  auto fail = [&rep](const std::string& msg) {
    if (rep.passed) {
      rep.passed = false;
      rep.first_violation = msg;
    }
  };
  auto site = [](AgentIndex n, Round t) {
    std::ostringstream os;
    os << "(agent " << n << ", round " << t << ")";
    return os.str();
  };

  for (const auto& r : in.records) {
    for (std::size_t n = 0; n < r.agents.size(); ++n) {
      const auto& a = r.agents[n];
      if (a.verified) {
        ++rep.nu_spent;
        if (a.observed != a.clean) fail("verified observation differs from clean reward at " +
                                        site(static_cast<AgentIndex>(n), r.round));
        if (a.c_norm != 0.0)
          fail("corruption on a verified round at " + site(static_cast<AgentIndex>(n), r.round));
      }
      const double moved = (a.observed - a.clean).cwiseAbs().maxCoeff();
      if (moved > a.c_norm + 1e-12)
        fail("projection moved the reward by more than |C|_inf at " +
             site(static_cast<AgentIndex>(n), r.round));
    }
  }

  for (const auto& e : in.events) {
    rep.gamma_spent += e.c_norm;
    if (std::abs(e.c_vec.cwiseAbs().maxCoeff() - e.c_norm) > 0.0)
      fail("event norm does not match its vector at " + site(e.agent, e.round));
    if (e.round >= 1 && static_cast<std::size_t>(e.round) <= in.records.size()) {
      const auto& rec = in.records[e.round - 1];
      if (e.agent >= 0 && static_cast<std::size_t>(e.agent) < rec.agents.size() &&
          rec.agents[e.agent].verified)
        fail("corruption event logged on a verified round at " + site(e.agent, e.round));
    }
  }
  if (rep.gamma_spent > in.gamma * (1.0 + 1e-12) + 1e-12) {
    std::ostringstream os;
    os << "corruption budget exceeded: spent " << rep.gamma_spent << " > Gamma " << in.gamma;
    fail(os.str());
  }
  if (rep.nu_spent > in.nu) {
    std::ostringstream os;
    os << "verification budget exceeded: spent " << rep.nu_spent << " > nu " << in.nu;
    fail(os.str());
  }

  if (in.inclusion) {
    const auto eff = effective_corruption(*in.inclusion, in.events);
    rep.gamma_eff = eff.total;
    double split = 0.0;
    for (double v : eff.per_arm) split += v;
    if (split != eff.total) fail("arm-wise effective corruption does not sum to the total");
    const double rho = in.protocol.mode == SharingMode::RawAppendAll ? in.num_agents : 1.0;
    if (!close(eff.total, rho * rep.gamma_spent, 1e-12)) {
      std::ostringstream os;
      os << "effective corruption " << eff.total << " != " << rho << " * spent "
         << rep.gamma_spent << " for " << in.protocol.name();
      fail(os.str());
    }
  }

  if (in.gaps) {
    const int K = static_cast<int>(in.gaps->theta.size());
    const auto pulls = team_pull_counts(in.records, K);
    const double by_round = team_regret(in.records, *in.gaps);
    const double by_count = team_regret_from_counts(pulls, *in.gaps);
    if (std::abs(by_round - by_count) > 1e-9)
      fail("team regret identity violated");
    std::int64_t total = 0;
    for (auto c : pulls) total += c;
    std::int64_t expected = 0;
    for (const auto& r : in.records) expected += static_cast<std::int64_t>(r.agents.size());
    if (total != expected) fail("team pull counts do not sum to N*T");
  }
  return rep;
}

void require_passing(const AuditReport& report) {
  if (!report.passed) throw AuditFailure("audit failed: " + report.first_violation);
}

}  // namespace corrbandit
