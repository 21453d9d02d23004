#pragma once

#include "corrbandit/types.hpp"

#include <cmath>
#include <string>

namespace corrbandit {

enum class ScalarizationKind { Linear, Chebyshev, LogSumExp };

// Monotone, 1-Lipschitz (under l-infinity) utility over reward vectors.
class ScalarizationSpec {
 public:
  // Identity on d = 1 (linear with weight 1).
  ScalarizationSpec() : ScalarizationSpec(ScalarizationKind::Linear, 1, RewardVector::Ones(1), 0.0) {}

  // weights must lie in the probability simplex.
  static ScalarizationSpec linear(RewardVector weights);
  static ScalarizationSpec chebyshev(int dim);
  static ScalarizationSpec logsumexp(int dim, double beta);

  ScalarizationKind kind() const noexcept { return kind_; }
  int dim() const noexcept { return dim_; }
  const RewardVector& weights() const noexcept { return weights_; }
  double beta() const noexcept { return beta_; }

  // Short identifier used in CSV rows, e.g. "linear", "chebyshev", "logsumexp(5)".
  std::string name() const;

 private:
  ScalarizationSpec(ScalarizationKind kind, int dim, RewardVector weights, double beta)
      : kind_(kind), dim_(dim), weights_(std::move(weights)), beta_(beta) {}

  ScalarizationKind kind_;
  int dim_;
  RewardVector weights_;
  double beta_;
};

namespace detail {
void check_point(const ScalarizationSpec& spec, Eigen::Index size, bool in_cube);
}

// phi(x). x must have the spec's dimension and lie in [0,1]^d.
template <typename Derived>
double evaluate(const ScalarizationSpec& spec, const Eigen::MatrixBase<Derived>& x) {
  detail::check_point(spec, x.size(),
                      (x.array() >= 0.0).all() && (x.array() <= 1.0).all());
  switch (spec.kind()) {
    case ScalarizationKind::Linear:
      return spec.weights().dot(x);
    case ScalarizationKind::Chebyshev:
      return x.minCoeff();
    case ScalarizationKind::LogSumExp: {
      // Max-shift keeps exp() bounded for large beta.
      const double beta = spec.beta();
      const double top = x.maxCoeff();
      const double s = (beta * (x.array() - top)).exp().sum();
      return top + std::log(s) / beta;
    }
  }
  return 0.0;
}

// Lipschitz constant under l-infinity. Exactly 1 for every supported family.
double lipschitz(const ScalarizationSpec& spec) noexcept;

// Supremum of phi over the clipped rectangle {x : |x - mean|_inf <= radius} n [0,1]^d,
// attained at the upper corner clip(mean + radius).
template <typename Derived>
double optimistic_index(const ScalarizationSpec& spec, const Eigen::MatrixBase<Derived>& mean,
                        double radius) {
  if (!(radius >= 0.0)) throw ContractViolation("optimistic_index: radius must be >= 0");
  const RewardVector corner = (mean.array() + radius).min(1.0).max(0.0).matrix();
  return evaluate(spec, corner);
}

}  // namespace corrbandit
