#pragma once

#include "corrbandit/types.hpp"

#include <cstdint>

namespace corrbandit {

// Scalar confidence interval for theta_arm built from verified samples only.
struct Certificate {
  ArmIndex arm = 0;
  double center = 0.0;
  double lcb = 0.0;
  double ucb = 0.0;
  std::int64_t h_ver = 0;

  double half_width() const noexcept { return 0.5 * (ucb - lcb); }
  bool contains(double value) const noexcept { return lcb <= value && value <= ucb; }
};

}  // namespace corrbandit
