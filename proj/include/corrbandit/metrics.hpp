#pragma once

#include "corrbandit/adversary.hpp"
#include "corrbandit/env.hpp"
#include "corrbandit/protocol.hpp"
#include "corrbandit/types.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace corrbandit {

struct AgentStep {
  ArmIndex arm = 0;
  bool verified = false;
  RewardVector clean;     // R_{n,t}
  RewardVector observed;  // X_{n,t}
  double c_norm = 0.0;
};

struct RoundRecord {
  Round round = 0;
  std::vector<AgentStep> agents;
  bool committed = false;  // all agents played a committed arm this round
};

struct EpisodeSummary {
  double team_regret = 0.0;
  double gamma_spent = 0.0;
  double gamma_eff = 0.0;
  std::vector<double> gamma_eff_per_arm;
  std::int64_t nu_spent = 0;
  std::optional<Round> commit_round;
  std::optional<ArmIndex> committed_arm;
  std::vector<std::int64_t> team_pulls;  // N_k^team(T)
  std::vector<double> regret_curve;
};

// sum_t sum_n (theta_{k*} - theta_{k_{n,t}})
double team_regret(std::span<const RoundRecord> records, const GapProfile& gaps);

// sum_{k != k*} Delta_k N_k^team(T); the other side of the regret identity.
double team_regret_from_counts(std::span<const std::int64_t> team_pulls, const GapProfile& gaps);

std::vector<std::int64_t> team_pull_counts(std::span<const RoundRecord> records, int num_arms);

// Cumulative team regret after each round; last element equals team_regret.
std::vector<double> regret_curve(std::span<const RoundRecord> records, const GapProfile& gaps);

struct AuditInput {
  std::span<const RoundRecord> records;
  std::span<const CorruptionEvent> events;
  const InclusionLedger* inclusion = nullptr;
  ProtocolKind protocol;
  int num_agents = 1;
  double gamma = 0.0;
  std::int64_t nu = 0;
  const GapProfile* gaps = nullptr;
};

struct AuditReport {
  bool passed = true;
  std::string first_violation;
  double gamma_spent = 0.0;
  std::int64_t nu_spent = 0;
  double gamma_eff = 0.0;
};

// Checks both budgets, per-event projection nonexpansiveness, the effective-corruption
// identity of the configured protocol and the regret identity.
AuditReport audit(const AuditInput& input);

// Throws AuditFailure carrying the first violation.
void require_passing(const AuditReport& report);

}  // namespace corrbandit
