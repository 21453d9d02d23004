#include "corrbandit/protocol.hpp"

#include <gtest/gtest.h>

#include <set>
#include <vector>

using namespace corrbandit;

namespace {

RewardVector vec(std::initializer_list<double> xs) {
  RewardVector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

// Advances one round with the given per-agent observations.
std::vector<Message> step(ProtocolState& s, Round t, const std::vector<AgentObservation>& obs,
                          std::vector<Recommendation> recs = {}) {
  if (recs.empty()) recs.resize(s.num_agents());
  s.observe_local(t, obs);
  auto msgs = emit_messages(s, t, obs, recs);
  ingest_messages(s, t, msgs);
  return msgs;
}

// Agent 1 pulls arm 0 unverified at t = 1; agent 0 pulls arm 1 verified.
std::vector<AgentObservation> scenario() {
  return {AgentObservation{0, 1, true, vec({1.0, 0.0})}, AgentObservation{1, 0, false, vec({0.5, 0.25})}};
}

// Count of estimators whose multiset for `arm` holds the sample, by scanning every multiset.
int brute_multiplicity(const InclusionLedger& l, AgentIndex n, Round t) {
  std::set<int> js;
  for (int j = 0; j < l.num_estimators(); ++j)
    for (ArmIndex k = 0; k < l.num_arms(); ++k)
      for (const auto& s : l.multiset(j, k))
        if (s.agent == n && s.round == t) js.insert(j);
  return static_cast<int>(js.size());
}

}  // namespace

TEST(protocol, names) {
  EXPECT_EQ(ProtocolKind::s1().name(), "S1");
  EXPECT_EQ(ProtocolKind::s2().name(), "S2");
  EXPECT_EQ(ProtocolKind::s3(false).name(), "S3-plain");
  EXPECT_EQ(ProtocolKind::s3(true).name(), "S3-cert");
}

TEST(protocol, s1_appends_everywhere) {
  ProtocolState s(ProtocolKind::s1(), 2, 2, 2);
  const auto msgs = step(s, 1, scenario());
  EXPECT_EQ(msgs.size(), 2u);
  for (int j = 0; j < 2; ++j) {
    EXPECT_EQ(s.estimators()[j].unverified_count(0), 1);
    EXPECT_EQ(s.estimators()[j].unverified_sums().row(0), vec({0.5, 0.25}).transpose());
    // Verified samples are pooled into every estimator under S1.
    EXPECT_EQ(s.estimators()[j].verified_count(1), 1);
    ASSERT_EQ(s.ledger().multiset(j, 0).size(), 1u);
    EXPECT_EQ(s.ledger().multiset(j, 0)[0], (SampleId{1, 1}));
  }
  EXPECT_EQ(multiplicity_of(s.ledger(), 1, 1), 2);
  EXPECT_EQ(brute_multiplicity(s.ledger(), 1, 1), 2);
  // Verified round.
  EXPECT_EQ(multiplicity_of(s.ledger(), 0, 1), 0);
}

TEST(protocol, s2_records_once) {
  ProtocolState s(ProtocolKind::s2(), 2, 2, 2);
  step(s, 1, scenario());
  ASSERT_EQ(s.estimators().size(), 1u);
  EXPECT_EQ(&s.estimator_for(0), &s.estimator_for(1));
  EXPECT_EQ(s.estimators()[0].unverified_count(0), 1);
  EXPECT_EQ(s.estimators()[0].verified_count(1), 1);
  ASSERT_EQ(s.ledger().multiset(0, 0).size(), 1u);
  EXPECT_EQ(multiplicity_of(s.ledger(), 1, 1), 1);
}

TEST(protocol, s3_keeps_samples_local) {
  ProtocolState s(ProtocolKind::s3(false), 2, 2, 2);
  step(s, 1, scenario(), {Recommendation{1, std::nullopt}, Recommendation{0, std::nullopt}});
  EXPECT_EQ(s.estimators()[1].unverified_count(0), 1);
  EXPECT_EQ(s.estimators()[0].unverified_count(0), 0);
  EXPECT_EQ(multiplicity_of(s.ledger(), 1, 1), 1);
  ASSERT_TRUE(s.recommendations()[0]);
  EXPECT_EQ(s.recommendations()[0]->arm, 1);
}

TEST(protocol, s3_plain_sends_arm_only) {
  ProtocolState s(ProtocolKind::s3(false), 2, 2, 2);
  Certificate c{1, 0.5, 0.4, 0.6, 3};
  const auto msgs = step(s, 1, scenario(), {Recommendation{1, c}, Recommendation{0, std::nullopt}});
  for (const auto& m : msgs) {
    const auto* r = std::get_if<RecommendMessage>(&m);
    ASSERT_TRUE(r);
    EXPECT_FALSE(r->cert);
  }
  ProtocolState cert(ProtocolKind::s3(true), 2, 2, 2);
  const auto cm = step(cert, 1, scenario(), {Recommendation{1, c}, Recommendation{0, std::nullopt}});
  EXPECT_TRUE(std::get<RecommendMessage>(cm[0]).cert);
}

TEST(protocol, s1_message_count) {
  ProtocolState s(ProtocolKind::s1(), 3, 2, 1);
  for (Round t = 1; t <= 4; ++t) {
    std::vector<AgentObservation> obs;
    for (int n = 0; n < 3; ++n) obs.push_back({n, (n + t) % 2, false, vec({0.5})});
    EXPECT_EQ(step(s, t, obs).size(), 3u);
  }
}

TEST(protocol, s2_stats_are_running_sums) {
  ProtocolState s(ProtocolKind::s2(), 2, 3, 2);
  RewardVector sum = RewardVector::Zero(2);
  std::vector<Message> last;
  for (Round t = 1; t <= 5; ++t) {
    const RewardVector x = vec({0.1 * t, 1.0 - 0.1 * t});
    sum += x;
    last = step(s, t, {AgentObservation{0, 2, false, x}, AgentObservation{1, 0, false, vec({1.0, 1.0})}});
  }
  const auto& st = std::get<StatsMessage>(last[0]);
  EXPECT_EQ(st.unverified_count(2), 5);
  EXPECT_NEAR((st.unverified_sum.row(2).transpose() - sum).cwiseAbs().maxCoeff(), 0.0, 1e-15);
  // Shared aggregate equals the brute-force sum over both agents.
  EXPECT_EQ(s.estimators()[0].unverified_count(0), 5);
  EXPECT_EQ(s.estimators()[0].unverified_count(2), 5);
  EXPECT_NEAR((s.estimators()[0].mean(2) - sum / 5).cwiseAbs().maxCoeff(), 0.0, 1e-15);
}

TEST(protocol, duplicate_ingest_rejected) {
  for (auto kind : {ProtocolKind::s1(), ProtocolKind::s2(), ProtocolKind::s3(true)}) {
    ProtocolState s(kind, 2, 2, 2);
    std::vector<Recommendation> recs(2);
    const auto obs = scenario();
    s.observe_local(1, obs);
    const auto msgs = emit_messages(s, 1, obs, recs);
    ingest_messages(s, 1, msgs);
    EXPECT_THROW(ingest_messages(s, 1, msgs), ProtocolStateError) << kind.name();
    EXPECT_THROW(ingest_messages(s, 3, msgs), ProtocolStateError) << kind.name();
    EXPECT_THROW(s.observe_local(3, obs), ProtocolStateError) << kind.name();
  }
}

TEST(protocol, s2_rejects_decreasing_counts) {
  ProtocolState s(ProtocolKind::s2(), 1, 2, 1);
  step(s, 1, {AgentObservation{0, 0, false, vec({1.0})}});
  const std::vector<AgentObservation> obs{AgentObservation{0, 1, false, vec({1.0})}};
  s.observe_local(2, obs);
  StatsMessage bad{0, CountVector::Zero(2), ArmMatrix::Zero(2, 1), CountVector::Zero(2), ArmMatrix::Zero(2, 1)};
  const std::vector<Message> msgs{bad};
  EXPECT_THROW(ingest_messages(s, 2, msgs), ProtocolStateError);
}

TEST(protocol, estimator_mean_guard) {
  EstimatorState e(0, 2, 2);
  EXPECT_EQ(e.mean(0), RewardVector::Zero(2));
  e.add_unverified(0, vec({1.0, 0.5}));
  e.add_unverified(0, vec({0.0, 0.5}));
  EXPECT_EQ(e.mean(0), vec({0.5, 0.5}));
  e.add_verified(1, vec({1.0, 1.0}));
  EXPECT_EQ(e.mean(1), RewardVector::Zero(2));
  EXPECT_EQ(e.verified_mean(1), vec({1.0, 1.0}));
}

TEST(effective_corruption, examples) {
  InclusionLedger empty(2, 3, 2);
  const auto none = effective_corruption(empty, {});
  EXPECT_EQ(none.total, 0.0);
  EXPECT_EQ(none.per_arm, std::vector<double>(3, 0.0));

  // S1, N = 2: both estimators consume both samples.
  ProtocolState s1(ProtocolKind::s1(), 2, 3, 1);
  step(s1, 1, {AgentObservation{0, 1, false, vec({0.2})}, AgentObservation{1, 2, false, vec({0.9})}});
  const std::vector<CorruptionEvent> ev{{0, 1, 1, vec({0.5}), 0.5}, {1, 1, 2, vec({-0.3}), 0.3}};
  EXPECT_NEAR(effective_corruption(s1.ledger(), ev).total, 1.6, 1e-15);

  ProtocolState s2(ProtocolKind::s2(), 2, 3, 1);
  step(s2, 1, {AgentObservation{0, 1, false, vec({0.2})}, AgentObservation{1, 2, false, vec({0.9})}});
  const std::vector<CorruptionEvent> ev2{{0, 1, 1, vec({0.4}), 0.4}, {1, 1, 2, vec({-0.6}), 0.6}};
  const auto e2 = effective_corruption(s2.ledger(), ev2);
  EXPECT_DOUBLE_EQ(e2.per_arm[1], 0.4);
  EXPECT_DOUBLE_EQ(e2.per_arm[2], 0.6);
  EXPECT_DOUBLE_EQ(e2.total, 1.0);
}

// Random traffic: every unverified sample lands in N estimators under S1 and one under S2/S3.
TEST(effective_corruption, multiplicity_by_protocol) {
  Stream rng(31);
  for (auto kind : {ProtocolKind::s1(), ProtocolKind::s2(), ProtocolKind::s3(false)}) {
    for (int N : {1, 3, 5}) {
      ProtocolState s(kind, N, 4, 2);
      std::vector<std::pair<AgentIndex, Round>> unverified;
      for (Round t = 1; t <= 30; ++t) {
        std::vector<AgentObservation> obs;
        for (int n = 0; n < N; ++n) {
          const bool v = rng.bernoulli(0.2);
          obs.push_back({n, static_cast<int>(rng() % 4), v, vec({rng.uniform(), rng.uniform()})});
          if (!v) unverified.emplace_back(n, t);
        }
        step(s, t, obs);
      }
      const int rho = kind.mode == SharingMode::RawAppendAll ? N : 1;
      for (auto [n, t] : unverified) {
        EXPECT_EQ(multiplicity_of(s.ledger(), n, t), rho);
        EXPECT_EQ(brute_multiplicity(s.ledger(), n, t), rho);
      }
    }
  }
}
