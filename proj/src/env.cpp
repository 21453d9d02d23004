#include "corrbandit/env.hpp"

#include <limits>

namespace corrbandit {

Instance::Instance(ArmMatrix means) : means_(std::move(means)) {
  if (means_.rows() < 1 || means_.cols() < 1)
    throw ContractViolation("instance needs K >= 1 arms and d >= 1 objectives");
  if (!((means_.array() >= 0.0).all() && (means_.array() <= 1.0).all()))
    throw ContractViolation("instance means must lie in [0,1]^d");
}

GapProfile compute_gaps(const Instance& instance, const ScalarizationSpec& spec) {
  const int K = instance.num_arms();
  GapProfile g;
  g.theta.resize(K);
  for (ArmIndex k = 0; k < K; ++k) g.theta[k] = evaluate(spec, instance.mean(k));

  for (ArmIndex k = 1; k < K; ++k)
    if (g.theta[k] > g.theta[g.best_arm]) g.best_arm = k;
  for (ArmIndex k = 0; k < K; ++k) {
    if (k == g.best_arm) continue;
    if (g.runner_up < 0 || g.theta[k] > g.theta[g.runner_up]) g.runner_up = k;
  }

  g.gaps.resize(K);
  g.delta_min = std::numeric_limits<double>::infinity();
  for (ArmIndex k = 0; k < K; ++k) {
    g.gaps[k] = g.theta[g.best_arm] - g.theta[k];
    g.delta_max = std::max(g.delta_max, g.gaps[k]);
    if (k != g.best_arm) g.delta_min = std::min(g.delta_min, g.gaps[k]);
  }
  if (K == 1) g.delta_min = 0.0;
  return g;
}

Instance generate_instance(int num_arms, int dim, double delta_min_floor,
                           const ScalarizationSpec& spec, Stream& rng) {
  if (num_arms < 2) throw ContractViolation("generate_instance: K must be >= 2");
  if (dim < 1) throw ContractViolation("generate_instance: d must be >= 1");
  if (!(delta_min_floor > 0.0 && delta_min_floor < 0.5))
    throw ContractViolation("generate_instance: delta_min_floor must be in (0, 0.5)");
  if (spec.dim() != dim) throw ContractViolation("generate_instance: spec dimension mismatch");

  ArmMatrix means(num_arms, dim);
  for (int attempt = 0; attempt < kMaxInstanceRejections; ++attempt) {
    for (Eigen::Index k = 0; k < means.rows(); ++k)
      for (Eigen::Index i = 0; i < means.cols(); ++i) means(k, i) = rng.uniform(0.1, 0.9);
    Instance candidate(means);
    if (compute_gaps(candidate, spec).delta_min >= delta_min_floor) return candidate;
  }
  throw InstanceGenerationFailed("no instance with delta_min >= " +
                                 std::to_string(delta_min_floor) + " after " +
                                 std::to_string(kMaxInstanceRejections) + " draws");
}

Instance planted_instance(int num_arms, int dim, double best_level, double rest_low,
                          double rest_high, Stream& rng) {
  if (num_arms < 2 || dim < 1) throw ContractViolation("planted_instance: need K >= 2, d >= 1");
  if (!(0.0 <= rest_low && rest_low <= rest_high && rest_high < best_level && best_level <= 1.0))
    throw ContractViolation("planted_instance: need 0 <= rest_low <= rest_high < best_level <= 1");
  ArmMatrix means(num_arms, dim);
  for (Eigen::Index k = 0; k < means.rows(); ++k)
    for (Eigen::Index i = 0; i < means.cols(); ++i) means(k, i) = rng.uniform(rest_low, rest_high);
  const auto best = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(num_arms));
  means.row(best).setConstant(best_level);
  return Instance(std::move(means));
}

RewardVector sample_reward(const Instance& instance, ArmIndex arm, Stream& rng) {
  if (arm < 0 || arm >= instance.num_arms())
    throw ContractViolation("sample_reward: arm " + std::to_string(arm) + " out of range");
  RewardVector r(instance.dim());
  for (Eigen::Index i = 0; i < r.size(); ++i)
    r(i) = rng.bernoulli(instance.means()(arm, i)) ? 1.0 : 0.0;
  return r;
}

}  // namespace corrbandit
