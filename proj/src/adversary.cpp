#include "corrbandit/adversary.hpp"

#include <cmath>

namespace corrbandit {

BudgetLedger::BudgetLedger(double gamma_total) : total_(gamma_total) {
  if (!(gamma_total >= 0.0) || !std::isfinite(gamma_total))
    throw ContractViolation("corruption budget must be finite and >= 0");
}

void BudgetLedger::charge(double amount) {
  if (!(amount >= 0.0)) throw BudgetViolation("corruption spend must be >= 0");
  const double left = total_ - spent_;
  if (amount > left)
    throw BudgetViolation("corruption spend " + std::to_string(amount) + " exceeds remaining " +
                          std::to_string(left));
  // Snap exact exhaustion so spent_ never drifts above total_ by rounding.
  spent_ = (amount == left) ? total_ : spent_ + amount;
}

double remaining_budget(const BudgetLedger& ledger) noexcept {
  return std::max(0.0, ledger.gamma_total() - ledger.gamma_spent());
}

void validate(const AdversaryStrategy& strategy) {
  std::visit(
      [](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, GreedyFlip>) {
          if (!(s.epsilon > 0.0 && s.epsilon <= 1.0))
            throw ContractViolation("greedy_flip: epsilon must be in (0,1]");
        } else if constexpr (std::is_same_v<S, ObliviousRandom>) {
          if (!(s.epsilon > 0.0 && s.epsilon <= 1.0))
            throw ContractViolation("oblivious_random: epsilon must be in (0,1]");
          if (!(s.p >= 0.0 && s.p <= 1.0))
            throw ContractViolation("oblivious_random: p must be in [0,1]");
        } else if constexpr (std::is_same_v<S, EarlyInformative>) {
          if (s.target_arm && *s.target_arm < 0)
            throw ContractViolation("early_informative: target arm must be >= 0");
        }
      },
      strategy);
}

std::string adversary_name(const AdversaryStrategy& strategy) {
  struct Namer {
    std::string operator()(const NoCorruption&) const { return "none"; }
    std::string operator()(const GreedyFlip&) const { return "greedy_flip"; }
    std::string operator()(const EarlyInformative&) const { return "early_informative"; }
    std::string operator()(const ObliviousRandom&) const { return "oblivious_random"; }
  };
  return std::visit(Namer{}, strategy);
}

namespace {

CorruptionEvent make_event(AgentIndex agent, Round round, ArmIndex arm, RewardVector c_vec) {
  CorruptionEvent e;
  e.agent = agent;
  e.round = round;
  e.arm = arm;
  e.c_norm = c_vec.size() ? c_vec.cwiseAbs().maxCoeff() : 0.0;
  e.c_vec = std::move(c_vec);
  return e;
}

}  // namespace

std::optional<CorruptionEvent> decide_corruption(const AdversaryStrategy& strategy,
                                                 BudgetLedger& ledger, const TranscriptView& view,
                                                 AgentIndex agent, Round round, ArmIndex arm,
                                                 bool verified, const RewardVector& clean,
                                                 Stream& rng) {
  if (verified) return std::nullopt;
  const double left = remaining_budget(ledger);
  if (left <= 0.0) return std::nullopt;
  const Eigen::Index d = clean.size();

  std::optional<CorruptionEvent> event;
  if (const auto* g = std::get_if<GreedyFlip>(&strategy)) {
    if (!view.gaps) throw ContractViolation("greedy_flip needs the gap profile");
    const double spend = std::min({g->epsilon, left, kMaxCorruptionPerSample});
    if (arm == view.gaps->best_arm)
      event = make_event(agent, round, arm, RewardVector::Constant(d, -spend));
    else if (arm == view.gaps->runner_up)
      event = make_event(agent, round, arm, RewardVector::Constant(d, spend));
  } else if (const auto* e = std::get_if<EarlyInformative>(&strategy)) {
    ArmIndex target = 0;
    if (e->target_arm) {
      target = *e->target_arm;
    } else {
      if (!view.gaps) throw ContractViolation("early_informative needs the gap profile");
      target = view.gaps->best_arm;
    }
    if (arm == target) {
      // Push the informative arm toward looking worthless.
      const double spend = std::min(left, kMaxCorruptionPerSample);
      event = make_event(agent, round, arm, RewardVector::Constant(d, -spend));
    }
  } else if (const auto* o = std::get_if<ObliviousRandom>(&strategy)) {
    // Both draws happen unconditionally so the stream position does not depend on the outcome.
    const bool hit = rng.bernoulli(o->p);
    RewardVector signs(d);
    for (Eigen::Index i = 0; i < d; ++i) signs(i) = rng.bernoulli(0.5) ? 1.0 : -1.0;
    if (hit) {
      const double spend = std::min({o->epsilon, left, kMaxCorruptionPerSample});
      event = make_event(agent, round, arm, spend * signs);
    }
  }

  if (event) ledger.charge(event->c_norm);
  return event;
}

RewardVector apply_corruption(const RewardVector& clean,
                              const std::optional<CorruptionEvent>& event) {
  if (!event) return clean;
  if (event->c_vec.size() != clean.size())
    throw ContractViolation("apply_corruption: dimension mismatch");
  return (clean + event->c_vec).cwiseMax(0.0).cwiseMin(1.0);
}

}  // namespace corrbandit
