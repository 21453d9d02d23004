#pragma once

#include "corrbandit/certificate.hpp"
#include "corrbandit/protocol.hpp"
#include "corrbandit/scalarize.hpp"
#include "corrbandit/types.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace corrbandit {

struct PolicyConfig {
  double delta = 0.01;
  // Known corruption budget: the radius carries an over-bound rho * Gamma on the arm-wise
  // effective corruption. Agnostic learners use the plain Hoeffding width.
  bool known_budget = true;
  double gamma = 0.0;
  std::int64_t nu = 0;  // global verification budget, front-loaded round robin
  bool certified = false;
};

void validate(const PolicyConfig& cfg);

struct ProblemDims {
  int d = 1;
  int K = 2;
  int N = 1;
  int T = 1;
};

// log(2 d K N T / delta): the union-bound level shared by every radius and certificate.
inline double confidence_log(const ProblemDims& dims, double delta) {
  return std::log(2.0 * dims.d * dims.K * static_cast<double>(dims.N) * dims.T / delta);
}

// sqrt(log(2dKNT/delta) / (2 max{1,m})): the stochastic part of every width.
inline double hoeffding_radius(std::int64_t m, const ProblemDims& dims, double delta) {
  const double denom = 2.0 * static_cast<double>(std::max<std::int64_t>(1, m));
  return std::sqrt(confidence_log(dims, delta) / denom);
}

// Confidence width for an estimator holding m unverified samples of an arm.
double confidence_radius(const PolicyConfig& cfg, ProtocolKind kind, std::int64_t m,
                         const ProblemDims& dims);

// Radii for every arm of one estimator.
std::vector<double> radii_for(const PolicyConfig& cfg, ProtocolKind kind,
                              const EstimatorState& estimator, const ProblemDims& dims);

// argmax_k phi(clip(mean_k + radius_k)); ties go to the lowest index.
ArmIndex select_arm(const EstimatorState& estimator, const ScalarizationSpec& spec,
                    std::span<const double> radii);

struct VerificationDecision {
  bool verify = false;
  std::optional<ArmIndex> forced_arm;
};

// Front-loaded round robin: while fewer than nu verifications have been spent, the next agent
// to ask verifies and is forced onto the arm with the smallest global verified count
// (lowest index on ties). Callers ask in (round, agent) order and must count each granted
// verification before asking again.
VerificationDecision schedule_verification(const PolicyConfig& cfg,
                                           const CountVector& global_verified_counts,
                                           std::int64_t nu_spent);

// Interval phi(verified mean) +/- L sqrt(log(2dKNT/delta) / (2 max{1,h_ver})).
Certificate verified_certificate(const ScalarizationSpec& spec, ArmIndex arm,
                                 const RewardVector& verified_sum, std::int64_t h_ver,
                                 const ProblemDims& dims, double delta);

struct FilterResult {
  std::vector<bool> eliminated;
  std::optional<ArmIndex> committed;
};

// Arm k is eliminated iff another certificate's LCB is strictly above k's UCB. Commits to
// the unique survivor when every arm holds a certificate with h_ver >= 1.
FilterResult filter_and_commit(std::span<const std::optional<Certificate>> certs);

// Verification threshold from the certificate dominance argument: per-arm h_ver such that
// the half-width is at most delta_min / 4, times K.
std::int64_t derived_nu_threshold(const ProblemDims& dims, double delta, double lipschitz_const,
                                  double delta_min);

}  // namespace corrbandit
