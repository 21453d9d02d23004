#include "corrbandit/protocol.hpp"

#include <algorithm>

namespace corrbandit {

std::string ProtocolKind::name() const {
  switch (mode) {
    case SharingMode::RawAppendAll:
      return "S1";
    case SharingMode::SyncStats:
      return "S2";
    case SharingMode::RecommendOnly:
      return certified ? "S3-cert" : "S3-plain";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// EstimatorState

EstimatorState::EstimatorState(int id, int num_arms, int dim)
    : id_(id),
      unverified_count_(CountVector::Zero(num_arms)),
      unverified_sum_(ArmMatrix::Zero(num_arms, dim)),
      verified_count_(CountVector::Zero(num_arms)),
      verified_sum_(ArmMatrix::Zero(num_arms, dim)) {}

RewardVector EstimatorState::mean(ArmIndex k) const {
  const double m = static_cast<double>(std::max<std::int64_t>(1, unverified_count_(k)));
  return unverified_sum_.row(k).transpose() / m;
}

RewardVector EstimatorState::verified_mean(ArmIndex k) const {
  const double h = static_cast<double>(std::max<std::int64_t>(1, verified_count_(k)));
  return verified_sum_.row(k).transpose() / h;
}

void EstimatorState::add_unverified(ArmIndex k, const RewardVector& x) {
  unverified_count_(k) += 1;
  unverified_sum_.row(k) += x.transpose();
}

void EstimatorState::add_verified(ArmIndex k, const RewardVector& x) {
  verified_count_(k) += 1;
  verified_sum_.row(k) += x.transpose();
}

void EstimatorState::assign(CountVector unverified_count, ArmMatrix unverified_sum,
                            CountVector verified_count, ArmMatrix verified_sum) {
  unverified_count_ = std::move(unverified_count);
  unverified_sum_ = std::move(unverified_sum);
  verified_count_ = std::move(verified_count);
  verified_sum_ = std::move(verified_sum);
}

// ---------------------------------------------------------------------------
// InclusionLedger

InclusionLedger::InclusionLedger(int num_estimators, int num_arms, int num_agents)
    : num_estimators_(num_estimators),
      num_arms_(num_arms),
      num_agents_(num_agents),
      sets_(static_cast<std::size_t>(num_estimators) * num_arms) {}

void InclusionLedger::record(int estimator, ArmIndex arm, SampleId sample) {
  if (estimator < 0 || estimator >= num_estimators_ || arm < 0 || arm >= num_arms_ ||
      sample.agent < 0 || sample.agent >= num_agents_ || sample.round < 1)
    throw ContractViolation("InclusionLedger::record: index out of range");
  sets_[static_cast<std::size_t>(estimator) * num_arms_ + arm].push_back(sample);
  const std::size_t slot = sample_slot(sample);
  if (consumers_.size() <= slot) consumers_.resize(slot + 1);
  consumers_[slot].push_back(estimator);
}

const std::vector<SampleId>& InclusionLedger::multiset(int estimator, ArmIndex arm) const {
  return sets_.at(static_cast<std::size_t>(estimator) * num_arms_ + arm);
}

std::span<const int> InclusionLedger::consumers(SampleId sample) const {
  if (sample.round < 1 || sample.agent < 0 || sample.agent >= num_agents_) return {};
  const std::size_t slot = sample_slot(sample);
  if (slot >= consumers_.size()) return {};
  return consumers_[slot];
}

int multiplicity_of(const InclusionLedger& ledger, AgentIndex agent, Round round) {
  std::vector<int> ids(ledger.consumers({agent, round}).begin(),
                       ledger.consumers({agent, round}).end());
  std::sort(ids.begin(), ids.end());
  return static_cast<int>(std::unique(ids.begin(), ids.end()) - ids.begin());
}

EffectiveCorruption effective_corruption(const InclusionLedger& ledger,
                                         std::span<const CorruptionEvent> events) {
  EffectiveCorruption out;
  out.per_arm.assign(ledger.num_arms(), 0.0);
  for (const auto& e : events) {
    const double rho = multiplicity_of(ledger, e.agent, e.round);
    out.per_arm.at(e.arm) += rho * e.c_norm;
  }
  // The total is the sum of the arm-wise terms so the split is conserved exactly.
  for (double v : out.per_arm) out.total += v;
  return out;
}

// ---------------------------------------------------------------------------
// ProtocolState

ProtocolState::ProtocolState(ProtocolKind kind, int num_agents, int num_arms, int dim)
    : kind_(kind),
      num_agents_(num_agents),
      num_arms_(num_arms),
      dim_(dim),
      ledger_(kind.mode == SharingMode::SyncStats ? 1 : num_agents, num_arms, num_agents),
      verified_pool_(-1, num_arms, dim),
      recommendations_(num_agents) {
  if (num_agents < 1 || num_arms < 1 || dim < 1)
    throw ContractViolation("ProtocolState: need N, K, d >= 1");
  const int estimators = ledger_.num_estimators();
  estimators_.reserve(estimators);
  for (int j = 0; j < estimators; ++j) estimators_.emplace_back(j, num_arms, dim);
  agent_stats_.reserve(num_agents);
  for (int n = 0; n < num_agents; ++n) agent_stats_.emplace_back(n, num_arms, dim);
  reported_counts_.assign(num_agents, CountVector::Zero(num_arms));
}

int ProtocolState::estimator_id_for(AgentIndex agent) const {
  if (agent < 0 || agent >= num_agents_) throw ContractViolation("agent index out of range");
  return kind_.mode == SharingMode::SyncStats ? 0 : agent;
}

const EstimatorState& ProtocolState::estimator_for(AgentIndex agent) const {
  return estimators_[estimator_id_for(agent)];
}

void ProtocolState::observe_local(Round round, std::span<const AgentObservation> observations) {
  if (round != last_local_ + 1 || last_local_ != last_ingested_)
    throw ProtocolStateError("observe_local: round " + std::to_string(round) +
                             " out of sequence");
  for (const auto& o : observations) {
    if (o.agent < 0 || o.agent >= num_agents_ || o.arm < 0 || o.arm >= num_arms_)
      throw ContractViolation("observe_local: agent or arm out of range");
    if (o.observed.size() != dim_) throw ContractViolation("observe_local: dimension mismatch");
    auto& own = agent_stats_[o.agent];
    if (o.verified) {
      own.add_verified(o.arm, o.observed);
      verified_pool_.add_verified(o.arm, o.observed);
    } else {
      own.add_unverified(o.arm, o.observed);
    }
    if (kind_.mode == SharingMode::SyncStats) continue;
    // S1 and S3: the agent's own sample enters its own estimator exactly once.
    auto& est = estimators_[o.agent];
    if (o.verified) {
      est.add_verified(o.arm, o.observed);
    } else {
      est.add_unverified(o.arm, o.observed);
      ledger_.record(o.agent, o.arm, {o.agent, round});
    }
  }
  last_local_ = round;
}

std::vector<Message> emit_messages(const ProtocolState& state, Round round,
                                   std::span<const AgentObservation> observations,
                                   std::span<const Recommendation> recommendations) {
  if (round != state.last_local_)
    throw ProtocolStateError("emit_messages: local observations for round " +
                             std::to_string(round) + " not applied");
  std::vector<Message> out;
  out.reserve(state.num_agents_);
  switch (state.kind_.mode) {
    case SharingMode::RawAppendAll:
      for (const auto& o : observations)
        out.emplace_back(RawMessage{o.agent, o.arm, o.observed, o.verified});
      break;
    case SharingMode::SyncStats:
      for (AgentIndex n = 0; n < state.num_agents_; ++n) {
        const auto& s = state.agent_stats_[n];
        out.emplace_back(StatsMessage{n, s.unverified_counts(), s.unverified_sums(),
                                      s.verified_counts(), s.verified_sums()});
      }
      break;
    case SharingMode::RecommendOnly:
      if (recommendations.size() != static_cast<std::size_t>(state.num_agents_))
        throw ContractViolation("emit_messages: S3 needs one recommendation per agent");
      for (AgentIndex n = 0; n < state.num_agents_; ++n) {
        const auto& r = recommendations[n];
        std::optional<Certificate> cert;
        if (state.kind_.certified) cert = r.cert;
        out.emplace_back(RecommendMessage{n, r.arm, cert});
      }
      break;
  }
  return out;
}

void ingest_messages(ProtocolState& state, Round round, std::span<const Message> messages) {
  if (round != state.last_ingested_ + 1)
    throw ProtocolStateError("ingest_messages: round " + std::to_string(round) +
                             " already ingested or out of order (last " +
                             std::to_string(state.last_ingested_) + ")");
  if (round != state.last_local_)
    throw ProtocolStateError("ingest_messages: local observations for round " +
                             std::to_string(round) + " not applied");

  const int N = state.num_agents_;
  switch (state.kind_.mode) {
    case SharingMode::RawAppendAll:
      for (const auto& m : messages) {
        const auto* raw = std::get_if<RawMessage>(&m);
        if (!raw) throw ProtocolStateError("S1 expects raw-sample messages");
        for (int j = 0; j < N; ++j) {
          if (j == raw->agent) continue;  // already appended locally
          auto& est = state.estimators_[j];
          if (raw->verified) {
            est.add_verified(raw->arm, raw->observed);
          } else {
            est.add_unverified(raw->arm, raw->observed);
            state.ledger_.record(j, raw->arm, {raw->agent, round});
          }
        }
      }
      break;

    case SharingMode::SyncStats: {
      if (messages.size() != static_cast<std::size_t>(N))
        throw ProtocolStateError("S2 expects one statistics message per agent");
      auto& shared = state.estimators_[0];
      CountVector H = CountVector::Zero(state.num_arms_);
      CountVector Hver = CountVector::Zero(state.num_arms_);
      ArmMatrix S = ArmMatrix::Zero(state.num_arms_, state.dim_);
      ArmMatrix Sver = ArmMatrix::Zero(state.num_arms_, state.dim_);
      for (const auto& m : messages) {
        const auto* st = std::get_if<StatsMessage>(&m);
        if (!st) throw ProtocolStateError("S2 expects statistics messages");
        if (st->agent < 0 || st->agent >= N) throw ContractViolation("S2 message agent out of range");
        auto& seen = state.reported_counts_[st->agent];
        const CountVector delta = st->unverified_count - seen;
        if ((delta.array() < 0).any())
          throw ProtocolStateError("S2 statistics counts decreased");
        if (delta.sum() > 1)
          throw ProtocolStateError("S2 statistics report more than one new sample per agent");
        for (ArmIndex k = 0; k < state.num_arms_; ++k)
          if (delta(k) == 1) state.ledger_.record(0, k, {st->agent, round});
        seen = st->unverified_count;
        H += st->unverified_count;
        S += st->unverified_sum;
        Hver += st->verified_count;
        Sver += st->verified_sum;
      }
      shared.assign(std::move(H), std::move(S), std::move(Hver), std::move(Sver));
      break;
    }

    case SharingMode::RecommendOnly:
      for (const auto& m : messages) {
        const auto* rec = std::get_if<RecommendMessage>(&m);
        if (!rec) throw ProtocolStateError("S3 expects recommendation messages");
        if (rec->agent < 0 || rec->agent >= N)
          throw ContractViolation("S3 message agent out of range");
        state.recommendations_[rec->agent] = Recommendation{rec->arm, rec->cert};
      }
      break;
  }
  state.last_ingested_ = round;
}

}  // namespace corrbandit
