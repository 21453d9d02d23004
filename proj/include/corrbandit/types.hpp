#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace corrbandit {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// A point in [0,1]^d: clean rewards, observed rewards and arm means.
using RewardVector = VectorX<double>;
// K x d, row k is the mean (or sum) vector of arm k.
using ArmMatrix = MatrixX<double>;
using CountVector = VectorX<std::int64_t>;

using ArmIndex = int;
using AgentIndex = int;
using Round = int;  // 1-based

// Caller broke a documented precondition (dimension mismatch, out-of-range arm, ...).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A corruption or verification spend that would exceed its global budget.
class BudgetViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ProtocolStateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class InstanceGenerationFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AuditFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed user configuration; `path` is the JSON pointer of the offending value.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

inline bool in_unit_cube(const RewardVector& x) {
  return (x.array() >= 0.0).all() && (x.array() <= 1.0).all();
}

}  // namespace corrbandit
