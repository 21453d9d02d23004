#include "corrbandit/policy.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace corrbandit;

namespace {

RewardVector vec(std::initializer_list<double> xs) {
  RewardVector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

PolicyConfig known(double gamma) {
  PolicyConfig c;
  c.known_budget = true;
  c.gamma = gamma;
  return c;
}

PolicyConfig agnostic() {
  PolicyConfig c;
  c.known_budget = false;
  c.gamma = 123.0;
  return c;
}

std::optional<Certificate> cert(double lcb, double ucb, std::int64_t h = 1) {
  return Certificate{0, 0.5 * (lcb + ucb), lcb, ucb, h};
}

}  // namespace

TEST(radius, agnostic_zero_pulls) {
  const ProblemDims dims{2, 5, 3, 500};
  const double expected = std::sqrt(std::log(2.0 * 2 * 5 * 3 * 500 / 0.01) / 2.0);
  EXPECT_NEAR(confidence_radius(agnostic(), ProtocolKind::s1(), 0, dims), expected, 1e-15);
}

TEST(radius, zero_budget_is_hoeffding) {
  const ProblemDims dims{3, 10, 5, 4000};
  for (auto kind : {ProtocolKind::s1(), ProtocolKind::s2(), ProtocolKind::s3(true)})
    for (std::int64_t m : {0, 1, 17, 400})
      EXPECT_DOUBLE_EQ(confidence_radius(known(0.0), kind, m, dims), hoeffding_radius(m, dims, 0.01));
}

TEST(radius, known_budget_plug_in) {
  // d=5, K=20, N=5, T=1e4, delta=0.01, Gamma=10, S1, m=100; evaluated by hand:
  // 2*5*20*5*1e4/0.01 = 1e9, log(1e9) = 20.72326583694641, sqrt(20.723.../200) = 0.32189...
  const ProblemDims dims{5, 20, 5, 10'000};
  const double hand = std::sqrt(20.72326583694641 / 200.0) + 0.5;
  EXPECT_NEAR(confidence_radius(known(10.0), ProtocolKind::s1(), 100, dims), hand, 1e-12);
  EXPECT_NEAR(confidence_radius(known(10.0), ProtocolKind::s2(), 100, dims), hand - 0.5 + 0.1, 1e-12);
  EXPECT_NEAR(confidence_radius(known(10.0), ProtocolKind::s3(false), 100, dims), hand - 0.4, 1e-12);
}

TEST(radius, negative_count) {
  EXPECT_THROW(confidence_radius(known(0), ProtocolKind::s2(), -1, {1, 2, 1, 10}), ContractViolation);
}

TEST(select_arm, unpulled_ties_to_first) {
  EstimatorState e(0, 4, 2);
  const ProblemDims dims{2, 4, 1, 100};
  const auto radii = radii_for(agnostic(), ProtocolKind::s2(), e, dims);
  EXPECT_EQ(select_arm(e, ScalarizationSpec::chebyshev(2), radii), 0);
}

TEST(select_arm, dominance_and_ties) {
  EstimatorState e(0, 3, 2);
  for (int i = 0; i < 10; ++i) {
    e.add_unverified(0, vec({0.0, 0.0}));
    e.add_unverified(1, vec({1.0, 1.0}));
    e.add_unverified(2, vec({1.0, 1.0}));
  }
  const std::vector<double> tiny(3, 1e-6);
  EXPECT_EQ(select_arm(e, ScalarizationSpec::linear(vec({0.5, 0.5})), tiny), 1);
  EXPECT_THROW(select_arm(e, ScalarizationSpec::chebyshev(2), std::vector<double>(2, 0.1)), ContractViolation);
}

// select_arm depends only on the ordering of indices: scaling equal radii never changes it.
TEST(select_arm, ordering_only) {
  Stream rng(4);
  const auto spec = ScalarizationSpec::linear(vec({0.3, 0.7}));
  for (int trial = 0; trial < 200; ++trial) {
    EstimatorState e(0, 5, 2);
    for (int k = 0; k < 5; ++k) e.add_unverified(k, vec({rng.uniform(), rng.uniform()}));
    const double r = rng.uniform(0.0, 0.01);
    const std::vector<double> a(5, r), b(5, 1.7 * r);
    std::vector<double> ia, ib;
    for (int k = 0; k < 5; ++k) {
      ia.push_back(optimistic_index(spec, e.mean(k), r));
      ib.push_back(optimistic_index(spec, e.mean(k), 1.7 * r));
    }
    const bool same_order = std::max_element(ia.begin(), ia.end()) - ia.begin() ==
                            std::max_element(ib.begin(), ib.end()) - ib.begin();
    if (same_order) EXPECT_EQ(select_arm(e, spec, a), select_arm(e, spec, b));
  }
}

TEST(schedule, zero_budget_never_verifies) {
  PolicyConfig c = agnostic();
  c.nu = 0;
  EXPECT_FALSE(schedule_verification(c, CountVector::Zero(4), 0).verify);
}

// Replay the front-loaded round robin and compare against the closed form.
TEST(schedule, round_robin_replay) {
  for (int K : {3, 5, 8})
    for (int N : {1, 3, 8, 10})
      for (std::int64_t nu : {std::int64_t{0}, std::int64_t{K}, std::int64_t{7}, std::int64_t{50}}) {
        PolicyConfig c = agnostic();
        c.nu = nu;
        CountVector h = CountVector::Zero(K);
        std::int64_t spent = 0;
        const int T = 20;
        Round all_covered = 0;
        for (Round t = 1; t <= T; ++t) {
          for (int n = 0; n < N; ++n) {
            const auto v = schedule_verification(c, h, spent);
            if (!v.verify) continue;
            ASSERT_TRUE(v.forced_arm);
            // Forced arm is the first arm with the smallest count.
            const auto min = h.minCoeff();
            int first = 0;
            while (h(first) != min) ++first;
            EXPECT_EQ(*v.forced_arm, first);
            h(*v.forced_arm) += 1;
            ++spent;
          }
          if (!all_covered && (h.array() >= 1).all()) all_covered = t;
        }
        EXPECT_EQ(spent, std::min<std::int64_t>(nu, std::int64_t{N} * T));
        EXPECT_LE(h.maxCoeff() - h.minCoeff(), 1);
        if (nu == K && N >= K) EXPECT_EQ(all_covered, (K + N - 1) / N);
      }
}

TEST(certificate, d1_plug_in) {
  const ProblemDims dims{1, 5, 3, 500};
  const auto c = verified_certificate(ScalarizationSpec::linear(vec({1.0})), 2, vec({3.0}), 4, dims, 0.05);
  EXPECT_DOUBLE_EQ(c.center, 0.75);
  const double eps = std::sqrt(std::log(2.0 * 1 * 5 * 3 * 500 / 0.05) / 8.0);
  EXPECT_NEAR(c.ucb - c.center, eps, 1e-15);
  EXPECT_NEAR(c.center - c.lcb, eps, 1e-15);
  EXPECT_NEAR(c.half_width(), eps, 1e-15);
  EXPECT_EQ(c.h_ver, 4);
  EXPECT_EQ(c.arm, 2);
}

TEST(certificate, zero_verified_guard) {
  const ProblemDims dims{2, 5, 3, 500};
  const auto spec = ScalarizationSpec::chebyshev(2);
  const auto c = verified_certificate(spec, 0, RewardVector::Zero(2), 0, dims, 0.05);
  EXPECT_EQ(c.center, 0.0);
  EXPECT_NEAR(c.half_width(), hoeffding_radius(1, dims, 0.05), 1e-15);
  EXPECT_LE(c.lcb, c.ucb);
}

TEST(certificate, shrinks_to_theta) {
  const ProblemDims dims{2, 5, 3, 500};
  const auto spec = ScalarizationSpec::linear(vec({0.5, 0.5}));
  const RewardVector mu = vec({0.25, 0.75});
  const auto c = verified_certificate(spec, 0, mu * 1e8, 100'000'000, dims, 0.05);
  EXPECT_NEAR(c.center, 0.5, 1e-12);
  EXPECT_LT(c.half_width(), 1e-3);
}

TEST(filter, examples) {
  {
    std::vector<std::optional<Certificate>> c{cert(0.6, 0.8), cert(0.3, 0.5)};
    const auto r = filter_and_commit(c);
    EXPECT_FALSE(r.eliminated[0]);
    EXPECT_TRUE(r.eliminated[1]);
    EXPECT_EQ(r.committed, 0);
  }
  {
    std::vector<std::optional<Certificate>> c{cert(0.4, 0.7), cert(0.5, 0.8)};
    const auto r = filter_and_commit(c);
    EXPECT_FALSE(r.eliminated[0]);
    EXPECT_FALSE(r.eliminated[1]);
    EXPECT_FALSE(r.committed);
  }
  {
    std::vector<std::optional<Certificate>> c{cert(0.7, 0.8), cert(0.2, 0.3), cert(0.1, 0.2)};
    const auto r = filter_and_commit(c);
    EXPECT_EQ(r.committed, 0);
  }
}

TEST(filter, strict_inequality_and_missing_certs) {
  std::vector<std::optional<Certificate>> touching{cert(0.5, 0.9), cert(0.3, 0.5)};
  EXPECT_FALSE(filter_and_commit(touching).eliminated[1]);

  // A missing certificate neither eliminates nor is eliminated, and blocks commit.
  std::vector<std::optional<Certificate>> partial{cert(0.7, 0.8), cert(0.2, 0.3), std::nullopt};
  const auto r = filter_and_commit(partial);
  EXPECT_TRUE(r.eliminated[1]);
  EXPECT_FALSE(r.eliminated[2]);
  EXPECT_FALSE(r.committed);

  std::vector<std::optional<Certificate>> unverified{cert(0.7, 0.8, 1), cert(0.2, 0.3, 0)};
  EXPECT_FALSE(filter_and_commit(unverified).committed);
}

// Brute force: k is eliminated iff some j != k has lcb_j > ucb_k.
TEST(filter, matches_pairwise_definition) {
  Stream rng(12);
  for (int trial = 0; trial < 500; ++trial) {
    const int K = 2 + static_cast<int>(rng() % 6);
    std::vector<std::optional<Certificate>> c(K);
    for (int k = 0; k < K; ++k) {
      if (rng.bernoulli(0.1)) continue;
      const double a = rng.uniform(), w = rng.uniform(0.0, 0.3);
      c[k] = cert(a - w, a + w);
    }
    const auto r = filter_and_commit(c);
    int survivors = 0;
    for (int k = 0; k < K; ++k) {
      bool dominated = false;
      for (int j = 0; j < K; ++j)
        if (j != k && c[j] && c[k] && c[j]->lcb > c[k]->ucb) dominated = true;
      EXPECT_EQ(static_cast<bool>(r.eliminated[k]), dominated);
      survivors += !dominated;
    }
    const bool all = std::all_of(c.begin(), c.end(), [](const auto& x) { return x.has_value(); });
    EXPECT_EQ(r.committed.has_value(), all && survivors == 1);
  }
}

TEST(threshold, derived_nu_star) {
  const ProblemDims dims{3, 10, 5, 4000};
  const double L = 1.0, dmin = 0.4;
  const double per_arm = std::ceil(8.0 * std::log(2.0 * 3 * 10 * 5 * 4000 / 0.01) / (dmin * dmin));
  EXPECT_EQ(derived_nu_threshold(dims, 0.01, L, dmin), 10 * static_cast<std::int64_t>(per_arm));
  EXPECT_THROW(derived_nu_threshold(dims, 0.01, L, 0.0), ContractViolation);
}
