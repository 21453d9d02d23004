#pragma once

#include "corrbandit/adversary.hpp"
#include "corrbandit/certificate.hpp"
#include "corrbandit/types.hpp"

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace corrbandit {

enum class SharingMode {
  RawAppendAll,   // S1: broadcast (arm, observed, verified); receivers append every sample
  SyncStats,      // S2: broadcast cumulative per-arm statistics; one shared estimator
  RecommendOnly,  // S3: broadcast an arm index, optionally with a verified certificate
};

struct ProtocolKind {
  SharingMode mode = SharingMode::SyncStats;
  bool certified = false;  // meaningful for RecommendOnly only

  static constexpr ProtocolKind s1() { return {SharingMode::RawAppendAll, false}; }
  static constexpr ProtocolKind s2() { return {SharingMode::SyncStats, false}; }
  static constexpr ProtocolKind s3(bool certified) { return {SharingMode::RecommendOnly, certified}; }

  // "S1", "S2", "S3-plain", "S3-cert"
  std::string name() const;
  friend bool operator==(const ProtocolKind&, const ProtocolKind&) = default;
};

// Per-estimator sufficient statistics. The empirical mean uses unverified samples only;
// verified statistics are kept separately and feed certificates.
class EstimatorState {
 public:
  EstimatorState(int id, int num_arms, int dim);

  int id() const noexcept { return id_; }
  int num_arms() const noexcept { return static_cast<int>(unverified_count_.size()); }
  int dim() const noexcept { return static_cast<int>(unverified_sum_.cols()); }

  std::int64_t unverified_count(ArmIndex k) const { return unverified_count_(k); }
  std::int64_t verified_count(ArmIndex k) const { return verified_count_(k); }
  const CountVector& unverified_counts() const noexcept { return unverified_count_; }
  const CountVector& verified_counts() const noexcept { return verified_count_; }
  const ArmMatrix& unverified_sums() const noexcept { return unverified_sum_; }
  const ArmMatrix& verified_sums() const noexcept { return verified_sum_; }

  // unverified sum / max{1, m}
  RewardVector mean(ArmIndex k) const;
  RewardVector verified_mean(ArmIndex k) const;

  void add_unverified(ArmIndex k, const RewardVector& x);
  void add_verified(ArmIndex k, const RewardVector& x);
  void assign(CountVector unverified_count, ArmMatrix unverified_sum, CountVector verified_count,
              ArmMatrix verified_sum);

 private:
  int id_;
  CountVector unverified_count_;
  ArmMatrix unverified_sum_;
  CountVector verified_count_;
  ArmMatrix verified_sum_;
};

struct SampleId {
  AgentIndex agent = 0;
  Round round = 0;
  friend bool operator==(const SampleId&, const SampleId&) = default;
};

// The multisets I_{j,k}(t): which unverified agent-round samples each estimator consumed.
class InclusionLedger {
 public:
  InclusionLedger(int num_estimators, int num_arms, int num_agents);

  int num_estimators() const noexcept { return num_estimators_; }
  int num_arms() const noexcept { return num_arms_; }
  int num_agents() const noexcept { return num_agents_; }

  void record(int estimator, ArmIndex arm, SampleId sample);
  const std::vector<SampleId>& multiset(int estimator, ArmIndex arm) const;
  // Estimator ids that consumed `sample` (possibly empty).
  std::span<const int> consumers(SampleId sample) const;

 private:
  std::size_t sample_slot(SampleId s) const {
    return static_cast<std::size_t>(s.round - 1) * num_agents_ + s.agent;
  }

  int num_estimators_;
  int num_arms_;
  int num_agents_;
  std::vector<std::vector<SampleId>> sets_;    // estimator * K + arm
  std::vector<std::vector<int>> consumers_;    // (round-1) * N + agent
};

// Number of distinct estimators that include the (unverified) sample of `agent` at `round`.
// Zero for verified rounds and for samples never recorded.
int multiplicity_of(const InclusionLedger& ledger, AgentIndex agent, Round round);

struct EffectiveCorruption {
  double total = 0.0;
  std::vector<double> per_arm;
};

// Gamma_eff = sum over events of rho_{n,t} * |C_{n,t}|_inf, and its split by arm.
EffectiveCorruption effective_corruption(const InclusionLedger& ledger,
                                         std::span<const CorruptionEvent> events);

struct RawMessage {
  AgentIndex agent = 0;
  ArmIndex arm = 0;
  RewardVector observed;
  bool verified = false;
};

struct StatsMessage {
  AgentIndex agent = 0;
  CountVector unverified_count;  // H_{n,k}: unverified pulls (the denominator of S_{n,k})
  ArmMatrix unverified_sum;      // S_{n,k}
  CountVector verified_count;    // H^ver_{n,k}
  ArmMatrix verified_sum;        // S^ver_{n,k}
};

struct RecommendMessage {
  AgentIndex agent = 0;
  ArmIndex arm = 0;
  std::optional<Certificate> cert;
};

using Message = std::variant<RawMessage, StatsMessage, RecommendMessage>;

// One agent's step within a round, as seen by the protocol layer.
struct AgentObservation {
  AgentIndex agent = 0;
  ArmIndex arm = 0;
  bool verified = false;
  RewardVector observed;  // X_{n,t}
};

struct Recommendation {
  ArmIndex arm = 0;
  std::optional<Certificate> cert;
};

// All communication state of one episode.
class ProtocolState {
 public:
  ProtocolState(ProtocolKind kind, int num_agents, int num_arms, int dim);

  ProtocolKind kind() const noexcept { return kind_; }
  int num_agents() const noexcept { return num_agents_; }
  int num_arms() const noexcept { return num_arms_; }
  int dim() const noexcept { return dim_; }

  // Index-driving estimator of each agent: its own under S1/S3, the shared one under S2.
  const EstimatorState& estimator_for(AgentIndex agent) const;
  int estimator_id_for(AgentIndex agent) const;
  const std::vector<EstimatorState>& estimators() const noexcept { return estimators_; }
  const InclusionLedger& ledger() const noexcept { return ledger_; }

  // Network-wide verified counts/sums (clean data; certificates and verification scheduling).
  const EstimatorState& verified_pool() const noexcept { return verified_pool_; }

  // Latest recommendation received from each agent (S3); empty before the first round.
  const std::vector<std::optional<Recommendation>>& recommendations() const noexcept {
    return recommendations_;
  }

  Round last_ingested_round() const noexcept { return last_ingested_; }

  // Incorporates each agent's own observation of `round` into its local state.
  void observe_local(Round round, std::span<const AgentObservation> observations);

 private:
  friend std::vector<Message> emit_messages(const ProtocolState&, Round,
                                            std::span<const AgentObservation>,
                                            std::span<const Recommendation>);
  friend void ingest_messages(ProtocolState&, Round, std::span<const Message>);

  ProtocolKind kind_;
  int num_agents_;
  int num_arms_;
  int dim_;
  std::vector<EstimatorState> estimators_;
  InclusionLedger ledger_;
  std::vector<EstimatorState> agent_stats_;  // each agent's own cumulative statistics
  EstimatorState verified_pool_;
  std::vector<CountVector> reported_counts_;  // S2: last unverified counts seen per agent
  std::vector<std::optional<Recommendation>> recommendations_;
  Round last_local_ = 0;
  Round last_ingested_ = 0;
};

// End-of-round broadcasts. `recommendations` (one per agent) is used under S3 only.
std::vector<Message> emit_messages(const ProtocolState& state, Round round,
                                   std::span<const AgentObservation> observations,
                                   std::span<const Recommendation> recommendations);

// Applies one round of broadcasts. Throws ProtocolStateError on repeated or out-of-order rounds.
void ingest_messages(ProtocolState& state, Round round, std::span<const Message> messages);

}  // namespace corrbandit
