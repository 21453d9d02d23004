#include "corrbandit/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

namespace corrbandit {

namespace {

std::string key_path(const std::string& parent, const std::string& key) { return parent + "/" + key; }

void require_object(const Json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "/" : path, "expected an object");
}

void reject_unknown(const Json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&key](const char* a) { return key == a; });
    if (!known) throw ConfigError(key_path(path, key), "unknown key");
  }
}

int get_int(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  const auto v = j.get<std::int64_t>();
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw ConfigError(path, "integer out of range");
  return static_cast<int>(v);
}

std::int64_t get_int64(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  return j.get<std::int64_t>();
}

double get_double(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  return j.get<double>();
}

bool get_bool(const Json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError(path, "expected true or false");
  return j.get<bool>();
}

std::string get_string(const Json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

Json vec_json(const RewardVector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json counts_json(const CountVector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json rows_json(const ArmMatrix& m) {
  Json a = Json::array();
  for (Eigen::Index k = 0; k < m.rows(); ++k) a.push_back(vec_json(m.row(k).transpose()));
  return a;
}

// Maps a ContractViolation from a domain constructor onto the JSON location that produced it.
template <typename F>
auto at_path(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ContractViolation& e) {
    throw ConfigError(path.empty() ? "/" : path, e.what());
  }
}

ProtocolKind protocol_from_string(const std::string& s, const std::string& path) {
  const std::string n = lower(s);
  if (n == "s1") return ProtocolKind::s1();
  if (n == "s2") return ProtocolKind::s2();
  if (n == "s3" || n == "s3-plain") return ProtocolKind::s3(false);
  if (n == "s3-cert") return ProtocolKind::s3(true);
  throw ConfigError(path, "unknown protocol '" + s + "' (expected S1|S2|S3-plain|S3-cert)");
}

}  // namespace

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("/", std::string("invalid JSON in ") + path + ": " + e.what());
  }
}

ScalarizationSpec scalarization_from_json(const Json& j, int d, const std::string& path) {
  require_object(j, path);
  const std::string kind = lower(get_string(j.value("kind", Json("linear")), key_path(path, "kind")));
  if (kind == "linear") {
    reject_unknown(j, path, {"kind", "weights"});
    RewardVector w = RewardVector::Constant(d, 1.0 / d);
    if (j.contains("weights")) {
      const auto& arr = j["weights"];
      const std::string wp = key_path(path, "weights");
      if (!arr.is_array()) throw ConfigError(wp, "expected an array");
      if (static_cast<int>(arr.size()) != d)
        throw ConfigError(wp, "expected " + std::to_string(d) + " weights");
      for (int i = 0; i < d; ++i) w(i) = get_double(arr[i], key_path(wp, std::to_string(i)));
    }
    return at_path(key_path(path, "weights"), [&] { return ScalarizationSpec::linear(w); });
  }
  if (kind == "chebyshev") {
    reject_unknown(j, path, {"kind"});
    return at_path(path, [&] { return ScalarizationSpec::chebyshev(d); });
  }
  if (kind == "logsumexp") {
    reject_unknown(j, path, {"kind", "beta"});
    const std::string bp = key_path(path, "beta");
    if (!j.contains("beta")) throw ConfigError(bp, "required for logsumexp");
    const double beta = get_double(j["beta"], bp);
    return at_path(bp, [&] { return ScalarizationSpec::logsumexp(d, beta); });
  }
  throw ConfigError(key_path(path, "kind"), "unknown scalarization '" + kind + "'");
}

Json to_json(const ScalarizationSpec& spec) {
  switch (spec.kind()) {
    case ScalarizationKind::Linear:
      return {{"kind", "linear"}, {"weights", vec_json(spec.weights())}};
    case ScalarizationKind::Chebyshev:
      return {{"kind", "chebyshev"}};
    case ScalarizationKind::LogSumExp:
      return {{"kind", "logsumexp"}, {"beta", spec.beta()}};
  }
  return {};
}

AdversaryStrategy adversary_from_json(const Json& j, const std::string& path) {
  if (j.is_string()) return adversary_from_json(Json{{"kind", j}}, path);
  require_object(j, path);
  const std::string kp = key_path(path, "kind");
  if (!j.contains("kind")) throw ConfigError(kp, "required");
  const std::string kind = lower(get_string(j["kind"], kp));
  AdversaryStrategy out;
  if (kind == "none") {
    reject_unknown(j, path, {"kind"});
    out = NoCorruption{};
  } else if (kind == "greedy_flip") {
    reject_unknown(j, path, {"kind", "epsilon"});
    GreedyFlip g;
    if (j.contains("epsilon")) g.epsilon = get_double(j["epsilon"], key_path(path, "epsilon"));
    out = g;
  } else if (kind == "early_informative") {
    reject_unknown(j, path, {"kind", "target_arm"});
    EarlyInformative e;
    if (j.contains("target_arm")) {
      const auto& t = j["target_arm"];
      const std::string tp = key_path(path, "target_arm");
      if (t.is_string()) {
        if (t.get<std::string>() != "best") throw ConfigError(tp, "expected an arm index or \"best\"");
      } else {
        e.target_arm = get_int(t, tp);
        if (*e.target_arm < 0) throw ConfigError(tp, "arm index must be >= 0");
      }
    }
    out = e;
  } else if (kind == "oblivious_random") {
    reject_unknown(j, path, {"kind", "p", "epsilon"});
    ObliviousRandom o;
    if (j.contains("p")) o.p = get_double(j["p"], key_path(path, "p"));
    if (j.contains("epsilon")) o.epsilon = get_double(j["epsilon"], key_path(path, "epsilon"));
    out = o;
  } else {
    throw ConfigError(kp, "unknown adversary '" + kind + "'");
  }
  at_path(path, [&] {
    validate(out);
    return 0;
  });
  return out;
}

Json to_json(const AdversaryStrategy& strategy) {
  struct V {
    Json operator()(const NoCorruption&) const { return {{"kind", "none"}}; }
    Json operator()(const GreedyFlip& g) const { return {{"kind", "greedy_flip"}, {"epsilon", g.epsilon}}; }
    Json operator()(const EarlyInformative& e) const {
      Json j{{"kind", "early_informative"}};
      j["target_arm"] = e.target_arm ? Json(*e.target_arm) : Json("best");
      return j;
    }
    Json operator()(const ObliviousRandom& o) const {
      return {{"kind", "oblivious_random"}, {"p", o.p}, {"epsilon", o.epsilon}};
    }
  };
  return std::visit(V{}, strategy);
}

Instance instance_from_json(const Json& j, const std::string& path) {
  require_object(j, path);
  reject_unknown(j, path, {"means"});
  const std::string mp = key_path(path, "means");
  if (!j.contains("means")) throw ConfigError(mp, "required");
  const auto& rows = j["means"];
  if (!rows.is_array() || rows.empty()) throw ConfigError(mp, "expected a non-empty array of arrays");
  const std::string r0 = key_path(mp, "0");
  if (!rows[0].is_array() || rows[0].empty()) throw ConfigError(r0, "expected a non-empty array");
  const auto K = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(rows[0].size());
  ArmMatrix means(K, d);
  for (Eigen::Index k = 0; k < K; ++k) {
    const std::string rp = key_path(mp, std::to_string(k));
    if (!rows[k].is_array() || static_cast<Eigen::Index>(rows[k].size()) != d)
      throw ConfigError(rp, "expected " + std::to_string(d) + " coordinates");
    for (Eigen::Index i = 0; i < d; ++i) means(k, i) = get_double(rows[k][i], key_path(rp, std::to_string(i)));
  }
  return at_path(mp, [&] { return Instance(means); });
}

Json to_json(const Instance& instance) { return {{"means", rows_json(instance.means())}}; }

EpisodeConfig episode_from_json(const Json& j, const std::string& path) {
  require_object(j, path);
  reject_unknown(j, path,
                 {"K", "d", "N", "T", "gamma", "protocol", "adversary", "scalarization", "policy",
                  "instance", "master_seed", "rep", "grid_index"});
  EpisodeConfig cfg;
  auto p = [&path](const char* key) { return key_path(path, key); };

  // A pinned instance fixes K and d unless they are given explicitly.
  if (j.contains("instance")) {
    const auto& ij = j["instance"];
    require_object(ij, p("instance"));
    if (ij.contains("means")) {
      Instance inst = instance_from_json(ij, p("instance"));
      cfg.K = inst.num_arms();
      cfg.d = inst.dim();
      cfg.instance = std::move(inst);
    } else {
      const std::string kind = lower(get_string(ij.value("kind", Json("uniform")), p("instance") + "/kind"));
      if (kind == "uniform") {
        reject_unknown(ij, p("instance"), {"kind", "delta_min_floor"});
        UniformInstanceParams u;
        if (ij.contains("delta_min_floor"))
          u.delta_min_floor = get_double(ij["delta_min_floor"], p("instance") + "/delta_min_floor");
        cfg.instance = u;
      } else if (kind == "planted") {
        reject_unknown(ij, p("instance"), {"kind", "best_level", "rest_low", "rest_high"});
        PlantedInstanceParams pl;
        if (ij.contains("best_level")) pl.best_level = get_double(ij["best_level"], p("instance") + "/best_level");
        if (ij.contains("rest_low")) pl.rest_low = get_double(ij["rest_low"], p("instance") + "/rest_low");
        if (ij.contains("rest_high")) pl.rest_high = get_double(ij["rest_high"], p("instance") + "/rest_high");
        cfg.instance = pl;
      } else {
        throw ConfigError(p("instance") + "/kind", "unknown instance kind '" + kind + "'");
      }
    }
  }

  if (j.contains("K")) cfg.K = get_int(j["K"], p("K"));
  if (j.contains("d")) cfg.d = get_int(j["d"], p("d"));
  if (j.contains("N")) cfg.N = get_int(j["N"], p("N"));
  if (j.contains("T")) cfg.T = get_int(j["T"], p("T"));
  if (j.contains("gamma")) cfg.gamma = get_double(j["gamma"], p("gamma"));
  if (j.contains("master_seed")) {
    const auto& s = j["master_seed"];
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() && s.get<std::int64_t>() < 0))
      throw ConfigError(p("master_seed"), "expected a non-negative integer");
    cfg.master_seed = s.get<std::uint64_t>();
  }
  if (j.contains("rep")) cfg.rep = get_int(j["rep"], p("rep"));
  if (j.contains("grid_index")) cfg.grid_index = get_int(j["grid_index"], p("grid_index"));
  if (cfg.d < 1) throw ConfigError(p("d"), "must be >= 1");

  if (j.contains("protocol")) cfg.protocol = protocol_from_string(get_string(j["protocol"], p("protocol")), p("protocol"));
  if (j.contains("adversary")) cfg.adversary = adversary_from_json(j["adversary"], p("adversary"));
  cfg.scalarization = j.contains("scalarization")
                          ? scalarization_from_json(j["scalarization"], cfg.d, p("scalarization"))
                          : ScalarizationSpec::linear(RewardVector::Constant(cfg.d, 1.0 / cfg.d));

  if (j.contains("policy")) {
    const auto& pj = j["policy"];
    const std::string pp = p("policy");
    require_object(pj, pp);
    reject_unknown(pj, pp, {"delta", "corruption_knowledge", "nu", "certified"});
    if (pj.contains("delta")) cfg.delta = get_double(pj["delta"], pp + "/delta");
    if (pj.contains("nu")) cfg.nu = get_int64(pj["nu"], pp + "/nu");
    if (pj.contains("corruption_knowledge")) {
      const auto& ck = pj["corruption_knowledge"];
      const std::string cp = pp + "/corruption_knowledge";
      if (ck.is_string()) {
        const std::string v = lower(ck.get<std::string>());
        if (v == "agnostic") cfg.known_budget = false;
        else if (v == "known_budget") cfg.known_budget = true;
        else throw ConfigError(cp, "expected \"known_budget\" or \"agnostic\"");
      } else {
        require_object(ck, cp);
        reject_unknown(ck, cp, {"known_budget"});
        if (ck.contains("known_budget")) cfg.known_budget = get_bool(ck["known_budget"], cp + "/known_budget");
      }
    }
    if (pj.contains("certified")) {
      const bool certified = get_bool(pj["certified"], pp + "/certified");
      if (cfg.protocol.mode != SharingMode::RecommendOnly) {
        if (certified) throw ConfigError(pp + "/certified", "certificates require protocol S3");
      } else if (j.contains("protocol") && lower(j["protocol"].get<std::string>()) != "s3" &&
                 certified != cfg.protocol.certified) {
        throw ConfigError(pp + "/certified", "contradicts protocol " + cfg.protocol.name());
      } else {
        cfg.protocol.certified = certified;
      }
    }
  }

  try {
    validate(cfg);
  } catch (const ContractViolation& e) {
    throw ConfigError(path.empty() ? "/" : path, e.what());
  }
  return cfg;
}

Json to_json(const EpisodeConfig& cfg) {
  Json j;
  j["K"] = cfg.K;
  j["d"] = cfg.d;
  j["N"] = cfg.N;
  j["T"] = cfg.T;
  j["gamma"] = cfg.gamma;
  j["protocol"] = cfg.protocol.name();
  j["adversary"] = to_json(cfg.adversary);
  j["scalarization"] = to_json(cfg.scalarization);
  j["policy"] = {{"delta", cfg.delta},
                 {"corruption_knowledge", {{"known_budget", cfg.known_budget}}},
                 {"nu", cfg.nu},
                 {"certified", cfg.protocol.certified}};
  struct V {
    Json operator()(const Instance& i) const { return to_json(i); }
    Json operator()(const UniformInstanceParams& u) const {
      return {{"kind", "uniform"}, {"delta_min_floor", u.delta_min_floor}};
    }
    Json operator()(const PlantedInstanceParams& p) const {
      return {{"kind", "planted"}, {"best_level", p.best_level}, {"rest_low", p.rest_low},
              {"rest_high", p.rest_high}};
    }
  };
  j["instance"] = std::visit(V{}, cfg.instance);
  j["master_seed"] = cfg.master_seed;
  j["rep"] = cfg.rep;
  return j;
}

std::vector<EpisodeConfig> grid_from_json(const Json& j) {
  require_object(j, "");
  if (!j.contains("base") && !j.contains("points")) return {episode_from_json(j)};
  reject_unknown(j, "", {"base", "points"});

  const Json base = j.value("base", Json::object());
  require_object(base, "/base");
  Json points = j.value("points", Json::array({Json::object()}));
  if (!points.is_array() || points.empty()) throw ConfigError("/points", "expected a non-empty array");

  std::vector<EpisodeConfig> grid;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const std::string pp = "/points/" + std::to_string(i);
    require_object(points[i], pp);
    Json merged = base;
    merged.merge_patch(points[i]);
    try {
      grid.push_back(episode_from_json(merged));
    } catch (const ConfigError& e) {
      // Attribute the error to the point when the point set that top-level key.
      const std::string& sub = e.path();
      const auto end = sub.find('/', 1);
      const std::string top = sub.size() > 1 ? sub.substr(1, end == std::string::npos ? end : end - 1) : "";
      const bool from_point = !top.empty() && points[i].contains(top);
      const std::string where = (from_point ? pp : std::string("/base")) + (sub == "/" ? "" : sub);
      const std::string msg = e.what();
      throw ConfigError(where, msg.substr(msg.find(": ") + 2));
    }
  }
  return grid;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 9);
  return std::string(buf, res.ptr);
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string csv_row(const ResultRow& r) {
  std::string s;
  s.reserve(160);
  auto add = [&s](const std::string& field) {
    if (!s.empty()) s += ',';
    s += field;
  };
  add(csv_field(r.protocol));
  add(csv_field(r.adversary));
  add(std::to_string(r.K));
  add(std::to_string(r.d));
  add(std::to_string(r.N));
  add(std::to_string(r.T));
  add(format_double(r.gamma));
  add(std::to_string(r.nu));
  add(csv_field(r.scalarization));
  add(std::to_string(r.master_seed));
  add(std::to_string(r.rep));
  add(format_double(r.team_regret));
  add(format_double(r.gamma_spent));
  add(format_double(r.gamma_eff));
  add(std::to_string(r.nu_spent));
  add(r.commit_round ? std::to_string(*r.commit_round) : std::string());
  add(format_double(r.wall_ms));
  return s;
}

void write_csv(std::ostream& os, std::span<const ResultRow> rows) {
  os << kCsvHeader << '\n';
  for (const auto& r : rows) os << csv_row(r) << '\n';
}

void write_trace_line(std::ostream& os, const RoundRecord& record, std::span<const Message> messages) {
  Json agents = Json::array();
  for (std::size_t n = 0; n < record.agents.size(); ++n) {
    const auto& a = record.agents[n];
    agents.push_back({{"agent", n},
                      {"arm", a.arm},
                      {"verified", a.verified},
                      {"clean", vec_json(a.clean)},
                      {"observed", vec_json(a.observed)},
                      {"c_norm", a.c_norm}});
  }
  struct V {
    Json operator()(const RawMessage& m) const {
      return {{"type", "raw"}, {"agent", m.agent}, {"arm", m.arm}, {"observed", vec_json(m.observed)},
              {"verified", m.verified}};
    }
    Json operator()(const StatsMessage& m) const {
      return {{"type", "stats"},
              {"agent", m.agent},
              {"H", counts_json(m.unverified_count)},
              {"S", rows_json(m.unverified_sum)},
              {"H_ver", counts_json(m.verified_count)},
              {"S_ver", rows_json(m.verified_sum)}};
    }
    Json operator()(const RecommendMessage& m) const {
      Json j{{"type", "recommend"}, {"agent", m.agent}, {"arm", m.arm}};
      j["cert"] = m.cert ? Json{{"lcb", m.cert->lcb}, {"ucb", m.cert->ucb}, {"h_ver", m.cert->h_ver}}
                         : Json(nullptr);
      return j;
    }
  };
  Json msgs = Json::array();
  for (const auto& m : messages) msgs.push_back(std::visit(V{}, m));
  const Json line{{"round", record.round}, {"committed", record.committed}, {"agents", agents},
                  {"messages", msgs}};
  os << line.dump() << '\n';
}

Json figure_meta(const FigurePreset& preset, const FigureOptions& options) {
  Json j;
  j["figure"] = preset.name;
  j["paper_scale"] = options.paper_scale;
  j["reps"] = preset.reps;
  j["master_seed"] = options.master_seed;
  j["instance"] = to_json(preset.instance);
  j["theta"] = preset.gaps.theta;
  j["best_arm"] = preset.gaps.best_arm;
  j["delta_min"] = preset.gaps.delta_min;
  j["delta_max"] = preset.gaps.delta_max;
  if (!preset.gamma_fractions.empty()) j["gamma_fractions"] = preset.gamma_fractions;
  if (!preset.nu_grid.empty()) {
    j["nu_star"] = preset.nu_star;
    j["nu_grid"] = preset.nu_grid;
  }
  Json grid = Json::array();
  for (const auto& c : preset.grid) {
    Json g = to_json(c);
    g.erase("instance");  // shared, recorded once above
    g.erase("rep");
    grid.push_back(std::move(g));
  }
  j["grid"] = std::move(grid);
  return j;
}

}  // namespace corrbandit
