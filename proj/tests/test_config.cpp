#include "corrbandit/config.hpp"

#include <gtest/gtest.h>

#include <clocale>
#include <sstream>

using namespace corrbandit;

namespace {

std::string error_path(const Json& j) {
  try {
    episode_from_json(j);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<no error>";
}

}  // namespace

TEST(config, defaults) {
  const auto c = episode_from_json(Json::object());
  EXPECT_EQ(c.K, 10);
  EXPECT_EQ(c.d, 3);
  EXPECT_EQ(c.scalarization.kind(), ScalarizationKind::Linear);
  EXPECT_EQ(c.scalarization.dim(), 3);
  EXPECT_EQ(c.protocol, ProtocolKind::s2());
}

TEST(config, full_episode) {
  const auto j = Json::parse(R"({
    "K": 4, "d": 2, "N": 3, "T": 50, "gamma": 12.5, "protocol": "S3",
    "adversary": {"kind": "greedy_flip", "epsilon": 0.5},
    "scalarization": {"kind": "logsumexp", "beta": 5.0},
    "policy": {"delta": 0.05, "corruption_knowledge": {"known_budget": false}, "nu": 200, "certified": true},
    "master_seed": 9, "rep": 2
  })");
  const auto c = episode_from_json(j);
  EXPECT_EQ(c.K, 4);
  EXPECT_EQ(c.N, 3);
  EXPECT_EQ(c.gamma, 12.5);
  EXPECT_EQ(c.protocol, ProtocolKind::s3(true));
  EXPECT_EQ(std::get<GreedyFlip>(c.adversary).epsilon, 0.5);
  EXPECT_EQ(c.scalarization.beta(), 5.0);
  EXPECT_FALSE(c.known_budget);
  EXPECT_EQ(c.nu, 200);
  EXPECT_EQ(c.delta, 0.05);
  EXPECT_EQ(c.master_seed, 9u);
  EXPECT_EQ(c.rep, 2);

  // Round trip.
  const auto back = episode_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
}

TEST(config, pinned_instance_sets_shape) {
  const auto c = episode_from_json(Json::parse(R"({"instance": {"means": [[0.1, 0.2], [0.3, 0.4], [0.5, 0.6]]},
                                                   "scalarization": {"kind": "chebyshev"}})"));
  EXPECT_EQ(c.K, 3);
  EXPECT_EQ(c.d, 2);
  const auto& inst = std::get<Instance>(c.instance);
  EXPECT_EQ(inst.means()(2, 1), 0.6);
  EXPECT_EQ(instance_from_json(to_json(inst), ""), inst);
}

TEST(config, error_paths) {
  EXPECT_EQ(error_path(Json::parse(R"({"K": "ten"})")), "/K");
  EXPECT_EQ(error_path(Json::parse(R"({"bogus": 1})")), "/bogus");
  EXPECT_EQ(error_path(Json::parse(R"({"adversary": {"kind": "greedy_flip", "epsilon": 2.0}})")), "/adversary");
  EXPECT_EQ(error_path(Json::parse(R"({"adversary": {"kind": "sneaky"}})")), "/adversary/kind");
  EXPECT_EQ(error_path(Json::parse(R"({"d": 2, "scalarization": {"kind": "linear", "weights": [0.5, 0.6]}})")),
            "/scalarization/weights");
  EXPECT_EQ(error_path(Json::parse(R"({"d": 2, "scalarization": {"kind": "linear", "weights": [0.5]}})")),
            "/scalarization/weights");
  EXPECT_EQ(error_path(Json::parse(R"({"scalarization": {"kind": "logsumexp"}})")), "/scalarization/beta");
  EXPECT_EQ(error_path(Json::parse(R"({"policy": {"nu": 1.5}})")), "/policy/nu");
  EXPECT_EQ(error_path(Json::parse(R"({"protocol": "S2", "policy": {"certified": true}})")), "/policy/certified");
  EXPECT_EQ(error_path(Json::parse(R"({"instance": {"means": [[0.1, 0.2], [0.3]]}})")), "/instance/means/1");
  EXPECT_EQ(error_path(Json::parse(R"({"instance": {"means": [[0.1], [1.3]]}})")), "/instance/means");
  EXPECT_EQ(error_path(Json::parse(R"({"protocol": "S9"})")), "/protocol");
  EXPECT_EQ(error_path(Json::parse(R"({"K": 1})")), "/");
}

TEST(config, grid_merge_patch) {
  const auto j = Json::parse(R"({
    "base": {"K": 4, "d": 1, "T": 20, "adversary": {"kind": "greedy_flip", "epsilon": 1.0}},
    "points": [{"protocol": "S1", "N": 2}, {"protocol": "S2", "adversary": {"epsilon": 0.25}}]
  })");
  const auto g = grid_from_json(j);
  ASSERT_EQ(g.size(), 2u);
  EXPECT_EQ(g[0].protocol, ProtocolKind::s1());
  EXPECT_EQ(g[0].N, 2);
  EXPECT_EQ(std::get<GreedyFlip>(g[1].adversary).epsilon, 0.25);
  EXPECT_EQ(g[1].K, 4);

  const auto bad = Json::parse(R"({"base": {"K": 4}, "points": [{}, {"N": "x"}]})");
  try {
    grid_from_json(bad);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.path(), "/points/1/N");
  }
  const auto bad_base = Json::parse(R"({"base": {"T": -1}, "points": [{}]})");
  try {
    grid_from_json(bad_base);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.path().rfind("/base", 0), 0u) << e.path();
  }
  EXPECT_EQ(grid_from_json(Json::parse(R"({"N": 2})")).size(), 1u);
}

TEST(csv, header_and_formatting) {
  EXPECT_STREQ(kCsvHeader,
               "protocol,adversary,K,d,N,T,gamma,nu,scalarization,master_seed,rep,team_regret,gamma_spent,"
               "gamma_eff,nu_spent,commit_round,wall_ms");
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1.0 / 3.0), "0.333333333");
  EXPECT_EQ(format_double(123456789012.0), "1.23456789e+11");
  EXPECT_EQ(format_double(0.0), "0");

  ResultRow r;
  r.protocol = "S3-cert";
  r.adversary = "early_informative";
  r.K = 10;
  r.d = 3;
  r.N = 5;
  r.T = 4000;
  r.gamma = 5000;
  r.nu = 17420;
  r.scalarization = "linear";
  r.master_seed = 20260101;
  r.rep = 3;
  r.team_regret = 906.0473671;
  r.gamma_spent = 5000;
  r.gamma_eff = 5000;
  r.nu_spent = 4355;
  r.wall_ms = 12.5;
  EXPECT_EQ(csv_row(r), "S3-cert,early_informative,10,3,5,4000,5000,17420,linear,20260101,3,906.047367,5000,5000,4355,,12.5");
  r.commit_round = 880;
  EXPECT_NE(csv_row(r).find(",4355,880,"), std::string::npos);
  r.scalarization = "a,b";
  EXPECT_NE(csv_row(r).find(",\"a,b\","), std::string::npos);
}

TEST(csv, locale_independent) {
  const char* old = std::setlocale(LC_ALL, nullptr);
  const std::string saved = old ? old : "C";
  if (std::setlocale(LC_ALL, "de_DE.UTF-8") || std::setlocale(LC_ALL, "fr_FR.UTF-8"))
    EXPECT_EQ(format_double(0.5), "0.5");
  std::setlocale(LC_ALL, saved.c_str());
}

TEST(meta, figure_meta_carries_threshold) {
  const auto p = figure_preset("fig3");
  const auto m = figure_meta(p, {});
  EXPECT_EQ(m["figure"], "fig3");
  EXPECT_EQ(m["nu_star"], p.nu_star);
  EXPECT_EQ(m["grid"].size(), p.grid.size());
  EXPECT_EQ(m["instance"]["means"].size(), 10u);
}
