#pragma once

#include "corrbandit/env.hpp"
#include "corrbandit/rng.hpp"
#include "corrbandit/types.hpp"

#include <optional>
#include <string>
#include <variant>

namespace corrbandit {

// Per-sample corruption never exceeds this l-infinity norm: rewards live in [0,1]^d.
inline constexpr double kMaxCorruptionPerSample = 1.0;

struct CorruptionEvent {
  AgentIndex agent = 0;
  Round round = 0;
  ArmIndex arm = 0;
  RewardVector c_vec;
  double c_norm = 0.0;  // |c_vec|_inf
};

// Global corruption budget: sum of |C_{n,t}|_inf over all agent-rounds <= gamma_total.
class BudgetLedger {
 public:
  explicit BudgetLedger(double gamma_total);

  double gamma_total() const noexcept { return total_; }
  double gamma_spent() const noexcept { return spent_; }

  // Records a spend; throws BudgetViolation when `amount` exceeds what is left.
  void charge(double amount);

 private:
  double total_;
  double spent_ = 0.0;
};

double remaining_budget(const BudgetLedger& ledger) noexcept;

struct NoCorruption {};

// Pushes the best arm's unverified samples down and the runner-up's up.
struct GreedyFlip {
  double epsilon = 1.0;
};

// Spends the whole budget on the earliest unverified pulls of one arm, at the per-sample cap.
struct EarlyInformative {
  std::optional<ArmIndex> target_arm;  // empty: the best arm
};

// Each unverified sample is hit w.p. p by a random-sign vector of norm epsilon.
struct ObliviousRandom {
  double p = 0.1;
  double epsilon = 0.5;
};

using AdversaryStrategy = std::variant<NoCorruption, GreedyFlip, EarlyInformative, ObliviousRandom>;

void validate(const AdversaryStrategy& strategy);
std::string adversary_name(const AdversaryStrategy& strategy);

// What the adversary may condition on. The adversary is handed the true gap profile,
// which is strictly more than the public transcript.
struct TranscriptView {
  const GapProfile* gaps = nullptr;
  int num_arms = 0;
};

// Returns the corruption for one agent-round (or none) and charges the ledger.
// Verified rounds are never corrupted.
std::optional<CorruptionEvent> decide_corruption(const AdversaryStrategy& strategy,
                                                 BudgetLedger& ledger, const TranscriptView& view,
                                                 AgentIndex agent, Round round, ArmIndex arm,
                                                 bool verified, const RewardVector& clean,
                                                 Stream& rng);

// clip(clean + c_vec) onto [0,1]^d, or clean when there is no event.
RewardVector apply_corruption(const RewardVector& clean, const std::optional<CorruptionEvent>& event);

}  // namespace corrbandit
