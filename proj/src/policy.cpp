#include "corrbandit/policy.hpp"

#include <limits>

namespace corrbandit {

void validate(const PolicyConfig& cfg) {
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw ContractViolation("policy: delta must be in (0,1)");
  if (cfg.nu < 0) throw ContractViolation("policy: nu must be >= 0");
  if (!(cfg.gamma >= 0.0)) throw ContractViolation("policy: gamma must be >= 0");
}

double confidence_radius(const PolicyConfig& cfg, ProtocolKind kind, std::int64_t m,
                         const ProblemDims& dims) {
  if (m < 0) throw ContractViolation("confidence_radius: m must be >= 0");
  const double denom = static_cast<double>(std::max<std::int64_t>(1, m));
  double corruption = 0.0;
  if (cfg.known_budget) {
    const double rho = kind.mode == SharingMode::RawAppendAll ? dims.N : 1.0;
    corruption = rho * cfg.gamma;
  }
  return hoeffding_radius(m, dims, cfg.delta) + corruption / denom;
}

std::vector<double> radii_for(const PolicyConfig& cfg, ProtocolKind kind,
                              const EstimatorState& estimator, const ProblemDims& dims) {
  std::vector<double> radii(estimator.num_arms());
  for (ArmIndex k = 0; k < estimator.num_arms(); ++k)
    radii[k] = confidence_radius(cfg, kind, estimator.unverified_count(k), dims);
  return radii;
}

ArmIndex select_arm(const EstimatorState& estimator, const ScalarizationSpec& spec,
                    std::span<const double> radii) {
  if (radii.size() != static_cast<std::size_t>(estimator.num_arms()))
    throw ContractViolation("select_arm: one radius per arm required");
  ArmIndex best = 0;
  double best_index = -std::numeric_limits<double>::infinity();
  for (ArmIndex k = 0; k < estimator.num_arms(); ++k) {
    const double u = optimistic_index(spec, estimator.mean(k), radii[k]);
    if (u > best_index) {
      best_index = u;
      best = k;
    }
  }
  return best;
}

VerificationDecision schedule_verification(const PolicyConfig& cfg,
                                           const CountVector& global_verified_counts,
                                           std::int64_t nu_spent) {
  if (nu_spent >= cfg.nu || global_verified_counts.size() == 0) return {};
  Eigen::Index arm = 0;
  global_verified_counts.minCoeff(&arm);  // first minimum
  return {true, static_cast<ArmIndex>(arm)};
}

Certificate verified_certificate(const ScalarizationSpec& spec, ArmIndex arm,
                                 const RewardVector& verified_sum, std::int64_t h_ver,
                                 const ProblemDims& dims, double delta) {
  if (h_ver < 0) throw ContractViolation("verified_certificate: h_ver must be >= 0");
  const double h = static_cast<double>(std::max<std::int64_t>(1, h_ver));
  const RewardVector mean = verified_sum / h;
  Certificate c;
  c.arm = arm;
  c.h_ver = h_ver;
  c.center = evaluate(spec, mean);
  const double eps = lipschitz(spec) * hoeffding_radius(h_ver, dims, delta);
  c.lcb = c.center - eps;
  c.ucb = c.center + eps;
  return c;
}

FilterResult filter_and_commit(std::span<const std::optional<Certificate>> certs) {
  FilterResult out;
  const std::size_t K = certs.size();
  out.eliminated.assign(K, false);

  double top_lcb = -std::numeric_limits<double>::infinity();
  double second_lcb = -std::numeric_limits<double>::infinity();
  std::size_t top_arm = K;
  for (std::size_t k = 0; k < K; ++k) {
    if (!certs[k]) continue;
    const double l = certs[k]->lcb;
    if (l > top_lcb) {
      second_lcb = top_lcb;
      top_lcb = l;
      top_arm = k;
    } else if (l > second_lcb) {
      second_lcb = l;
    }
  }
  for (std::size_t k = 0; k < K; ++k) {
    if (!certs[k]) continue;
    // Best LCB among the other arms.
    const double rival = (k == top_arm) ? second_lcb : top_lcb;
    out.eliminated[k] = rival > certs[k]->ucb;
  }

  bool all_certified = K > 0;
  std::size_t survivors = 0;
  std::size_t survivor = 0;
  for (std::size_t k = 0; k < K; ++k) {
    if (!certs[k] || certs[k]->h_ver < 1) all_certified = false;
    if (!out.eliminated[k]) {
      ++survivors;
      survivor = k;
    }
  }
  if (all_certified && survivors == 1) out.committed = static_cast<ArmIndex>(survivor);
  return out;
}

std::int64_t derived_nu_threshold(const ProblemDims& dims, double delta, double lipschitz_const,
                                  double delta_min) {
  if (!(delta_min > 0.0)) throw ContractViolation("derived_nu_threshold: delta_min must be > 0");
  const double per_arm =
      std::ceil(8.0 * lipschitz_const * lipschitz_const * confidence_log(dims, delta) /
                (delta_min * delta_min));
  return static_cast<std::int64_t>(dims.K) * static_cast<std::int64_t>(per_arm);
}

}  // namespace corrbandit
