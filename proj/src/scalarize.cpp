#include "corrbandit/scalarize.hpp"

#include <cstdio>

namespace corrbandit {

ScalarizationSpec ScalarizationSpec::linear(RewardVector weights) {
  if (weights.size() < 1) throw ContractViolation("linear scalarization needs d >= 1 weights");
  if ((weights.array() < 0.0).any())
    throw ContractViolation("linear scalarization weights must be nonnegative");
  if (std::abs(weights.sum() - 1.0) > 1e-12)
    throw ContractViolation("linear scalarization weights must sum to 1");
  const int d = static_cast<int>(weights.size());
  return ScalarizationSpec(ScalarizationKind::Linear, d, std::move(weights), 0.0);
}

ScalarizationSpec ScalarizationSpec::chebyshev(int dim) {
  if (dim < 1) throw ContractViolation("chebyshev scalarization needs d >= 1");
  return ScalarizationSpec(ScalarizationKind::Chebyshev, dim, RewardVector(), 0.0);
}

ScalarizationSpec ScalarizationSpec::logsumexp(int dim, double beta) {
  if (dim < 1) throw ContractViolation("logsumexp scalarization needs d >= 1");
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw ContractViolation("logsumexp temperature beta must be positive");
  return ScalarizationSpec(ScalarizationKind::LogSumExp, dim, RewardVector(), beta);
}

std::string ScalarizationSpec::name() const {
  switch (kind_) {
    case ScalarizationKind::Linear:
      return "linear";
    case ScalarizationKind::Chebyshev:
      return "chebyshev";
    case ScalarizationKind::LogSumExp: {
      char buf[48];
      std::snprintf(buf, sizeof buf, "logsumexp(%g)", beta_);
      return buf;
    }
  }
  return "unknown";
}

double lipschitz(const ScalarizationSpec&) noexcept { return 1.0; }

namespace detail {
void check_point(const ScalarizationSpec& spec, Eigen::Index size, bool in_cube) {
  if (size != spec.dim())
    throw ContractViolation("scalarization: dimension mismatch (expected " +
                            std::to_string(spec.dim()) + ", got " + std::to_string(size) + ")");
  if (!in_cube) throw ContractViolation("scalarization: point outside [0,1]^d");
}
}  // namespace detail

}  // namespace corrbandit
