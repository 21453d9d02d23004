#pragma once

#include "corrbandit/rng.hpp"
#include "corrbandit/scalarize.hpp"
#include "corrbandit/types.hpp"

#include <vector>

namespace corrbandit {

// K arms with coordinate-wise Bernoulli rewards; row k of `means` is mu_k.
class Instance {
 public:
  explicit Instance(ArmMatrix means);

  int num_arms() const noexcept { return static_cast<int>(means_.rows()); }
  int dim() const noexcept { return static_cast<int>(means_.cols()); }
  const ArmMatrix& means() const noexcept { return means_; }
  auto mean(ArmIndex k) const { return means_.row(k).transpose(); }

  friend bool operator==(const Instance& a, const Instance& b) { return a.means_ == b.means_; }

 private:
  ArmMatrix means_;
};

struct GapProfile {
  std::vector<double> theta;
  ArmIndex best_arm = 0;
  // Arm with the largest theta after best_arm (lowest index on ties); -1 when K = 1.
  ArmIndex runner_up = -1;
  std::vector<double> gaps;
  double delta_min = 0.0;
  double delta_max = 0.0;
};

GapProfile compute_gaps(const Instance& instance, const ScalarizationSpec& spec);

// Means i.i.d. uniform on [0.1, 0.9]^d, rejection-resampled until delta_min >= delta_min_floor.
// Throws InstanceGenerationFailed after 10'000 consecutive rejections.
Instance generate_instance(int num_arms, int dim, double delta_min_floor,
                           const ScalarizationSpec& spec, Stream& rng);

// One arm at `best_level` on every coordinate (placed at a random index), the rest
// uniform on [rest_low, rest_high]^d. Used by figure presets that need a clear best arm.
Instance planted_instance(int num_arms, int dim, double best_level, double rest_low,
                          double rest_high, Stream& rng);

// One draw of the clean reward vector for `arm`: coordinate i is 1 w.p. mu_{arm,i}.
RewardVector sample_reward(const Instance& instance, ArmIndex arm, Stream& rng);

inline constexpr int kMaxInstanceRejections = 10'000;

}  // namespace corrbandit
