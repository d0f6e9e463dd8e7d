#include "plmtest/config.hpp"

#include <charconv>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "plmtest/error.hpp"

namespace plmtest::harness {

using nlohmann::json;

namespace {

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::config_error, what); }

template <class T>
std::vector<T> list_of(const json& j, const char* key) {
  if (j.is_array()) return j.get<std::vector<T>>();
  if (j.is_null()) config_error(std::string("missing ") + key);
  return {j.get<T>()};
}

}  // namespace

std::string CellSpec::id() const {
  std::ostringstream s;
  s << simgen::to_string(model) << "|N=" << n_total << "|p=" << p << "|rho=" << shortest(rho)
    << '|' << simgen::to_string(scenario) << "|s1=" << s1 << "|c1=" << shortest(c1) << '|'
    << estimator;
  return s.str();
}

std::uint64_t CellSpec::hash() const { return fnv1a64(id()); }

simgen::GenConfig CellSpec::gen_config(const ExperimentConfig& cfg, std::uint64_t seed) const {
  simgen::GenConfig g;
  g.n_total = n_total;
  g.p1 = p1;
  g.p2 = p2;
  g.rho = rho;
  g.model = model;
  g.s1 = s1;
  g.c1 = c1;
  g.s2 = cfg.s2;
  g.c2 = cfg.c2;
  g.noise_sd = cfg.noise_sd;
  g.seed = seed;
  return g;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.replicates < 1) config_error("replicates must be >= 1");
  if (cfg.workers < 1) config_error("workers must be >= 1");
  if (cfg.test.tests.empty()) config_error("test set is empty");
  if (!(cfg.test.alpha > 0.0 && cfg.test.alpha < 1.0)) config_error("alpha must be in (0, 1)");
  if (!nuisance::has_estimator(cfg.test.nuisance.method)) {
    config_error("unknown nuisance method '" + cfg.test.nuisance.method + "'");
  }
  if (cfg.test.nuisance.folds < 2) config_error("nuisance.folds must be >= 2");
  if (cfg.test.nuisance.forest.trees < 1) config_error("nuisance.trees must be >= 1");
  if (cfg.test.pe.r_boot < 1) config_error("pe.r_boot must be >= 1");
  if (!(cfg.test.pe.a_np > 0.0)) config_error("pe.a_np must be > 0");
  if (!(cfg.test.pe.lambda_k > 0.0 && cfg.test.pe.lambda_k <= 1.0)) {
    config_error("pe.lambda must be in (0, 1]");
  }
  if (cfg.grid.n_total.empty() || cfg.grid.p.empty() || cfg.grid.rho.empty() ||
      cfg.grid.models.empty()) {
    config_error("every grid list needs at least one value");
  }
  for (auto n : cfg.grid.n_total) {
    if (n < kMinTestRows) config_error("N must be >= 8");
  }
  for (auto p : cfg.grid.p) {
    if (p < 2 || p % 2 != 0) config_error("p must be even and >= 2 (p1 = p2 = p/2)");
  }
  for (auto rho : cfg.grid.rho) {
    if (!(rho >= 0.0 && rho < 1.0)) config_error("rho must be in [0, 1)");
  }
  if (cfg.scenarios.empty()) config_error("no scenarios");
  std::set<std::string> ids;
  for (const auto& cell : expand_cells(cfg)) {
    if (cell.s1 > cell.p1) config_error("s1 exceeds p1 in cell " + cell.id());
    if (cfg.s2 > cell.p2) config_error("s2 exceeds p2 in cell " + cell.id());
    if (cell.model == simgen::Model::m3 && cell.p2 < 6) config_error("M3 needs p2 >= 6");
    if (!ids.insert(cell.id()).second) config_error("duplicate cell " + cell.id());
  }
}

std::vector<CellSpec> expand_cells(const ExperimentConfig& cfg) {
  std::vector<CellSpec> cells;
  for (auto model : cfg.grid.models) {
    for (auto n : cfg.grid.n_total) {
      for (auto p : cfg.grid.p) {
        for (auto rho : cfg.grid.rho) {
          CellSpec base;
          base.model = model;
          base.n_total = n;
          base.p = p;
          base.p1 = p / 2;
          base.p2 = p - p / 2;
          base.rho = rho;
          base.estimator = cfg.test.nuisance.method;
          for (const auto& sc : cfg.scenarios) {
            std::vector<Index> sizes;
            if (sc.kind == simgen::Scenario::s1_null) {
              sizes.push_back(0);
            } else {
              sizes = sc.s1;
              for (int pct : sc.s1_percent) sizes.push_back(base.p1 * pct / 100);
            }
            for (Index s1 : sizes) {
              CellSpec cell = base;
              cell.scenario = sc.kind;
              cell.s1 = s1;
              cell.c1 = simgen::scenario_signal(sc.kind, s1);
              cells.push_back(cell);
            }
          }
        }
      }
    }
  }
  return cells;
}

ExperimentConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    config_error(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) config_error("config must be a JSON object");

  ExperimentConfig cfg;
  try {
    if (j.contains("grid")) {
      const auto& g = j["grid"];
      if (g.contains("N")) cfg.grid.n_total = list_of<Index>(g["N"], "grid.N");
      if (g.contains("p")) cfg.grid.p = list_of<Index>(g["p"], "grid.p");
      if (g.contains("rho")) cfg.grid.rho = list_of<double>(g["rho"], "grid.rho");
      if (g.contains("model")) {
        cfg.grid.models.clear();
        for (const auto& m : list_of<std::string>(g["model"], "grid.model")) {
          cfg.grid.models.push_back(simgen::parse_model(m));
        }
      }
    }
    if (j.contains("scenarios")) {
      cfg.scenarios.clear();
      for (const auto& s : j["scenarios"]) {
        ScenarioSpec sc;
        sc.kind = simgen::parse_scenario(s.at("scenario").get<std::string>());
        if (s.contains("s1")) sc.s1 = list_of<Index>(s["s1"], "s1");
        if (s.contains("s1_percent")) sc.s1_percent = list_of<int>(s["s1_percent"], "s1_percent");
        if (sc.kind != simgen::Scenario::s1_null && sc.s1.empty() && sc.s1_percent.empty()) {
          config_error("scenario " + std::string(simgen::to_string(sc.kind)) +
                       " needs s1 or s1_percent");
        }
        cfg.scenarios.push_back(std::move(sc));
      }
    }
    if (j.contains("gamma")) {
      cfg.s2 = j["gamma"].value("s2", cfg.s2);
      cfg.c2 = j["gamma"].value("c2", cfg.c2);
    }
    cfg.noise_sd = j.value("noise_sd", cfg.noise_sd);
    if (j.contains("nuisance")) {
      const auto& nj = j["nuisance"];
      auto& np = cfg.test.nuisance;
      np.method = nj.value("method", np.method);
      np.folds = nj.value("folds", np.folds);
      np.path_length = nj.value("path_length", np.path_length);
      np.lambda_ratio = nj.value("lambda_ratio", np.lambda_ratio);
      np.forest.trees = nj.value("trees", np.forest.trees);
      np.forest.mtry = nj.value("mtry", np.forest.mtry);
      np.forest.min_leaf = nj.value("min_leaf", np.forest.min_leaf);
    }
    if (j.contains("tests")) {
      cfg.test.tests.clear();
      for (const auto& t : list_of<std::string>(j["tests"], "tests")) {
        cfg.test.tests.push_back(parse_test_kind(t));
      }
    }
    if (j.contains("pe")) {
      const auto& pj = j["pe"];
      cfg.test.pe.lambda_k = pj.value("lambda", cfg.test.pe.lambda_k);
      cfg.test.pe.a_np = pj.value("a_np", cfg.test.pe.a_np);
      cfg.test.pe.r_boot = pj.value("r_boot", cfg.test.pe.r_boot);
      cfg.test.pe.theory_threshold = pj.value("theory_threshold", cfg.test.pe.theory_threshold);
    }
    cfg.test.alpha = j.value("alpha", cfg.test.alpha);
    cfg.replicates = j.value("replicates", cfg.replicates);
    cfg.master_seed = j.value("master_seed", cfg.master_seed);
    cfg.workers = j.value("workers", cfg.workers);
    cfg.record_timing = j.value("timing", cfg.record_timing);
  } catch (const json::exception& e) {
    config_error(std::string("bad config value: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::config_error, "cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return config_from_json_text(buf.str());
}

std::string config_to_json_text(const ExperimentConfig& cfg) {
  json j;
  std::vector<std::string> models;
  for (auto m : cfg.grid.models) models.emplace_back(simgen::to_string(m));
  j["grid"] = {{"N", cfg.grid.n_total}, {"p", cfg.grid.p}, {"rho", cfg.grid.rho}, {"model", models}};
  j["scenarios"] = json::array();
  for (const auto& sc : cfg.scenarios) {
    json s{{"scenario", std::string(simgen::to_string(sc.kind))}};
    if (!sc.s1.empty()) s["s1"] = sc.s1;
    if (!sc.s1_percent.empty()) s["s1_percent"] = sc.s1_percent;
    j["scenarios"].push_back(s);
  }
  j["gamma"] = {{"s2", cfg.s2}, {"c2", cfg.c2}};
  j["noise_sd"] = cfg.noise_sd;
  const auto& np = cfg.test.nuisance;
  j["nuisance"] = {{"method", np.method},           {"folds", np.folds},
                   {"path_length", np.path_length}, {"lambda_ratio", np.lambda_ratio},
                   {"trees", np.forest.trees},      {"mtry", np.forest.mtry},
                   {"min_leaf", np.forest.min_leaf}};
  std::vector<std::string> tests;
  for (auto t : cfg.test.tests) tests.emplace_back(to_string(t));
  j["tests"] = tests;
  j["pe"] = {{"lambda", cfg.test.pe.lambda_k},
             {"a_np", cfg.test.pe.a_np},
             {"r_boot", cfg.test.pe.r_boot},
             {"theory_threshold", cfg.test.pe.theory_threshold}};
  j["alpha"] = cfg.test.alpha;
  j["replicates"] = cfg.replicates;
  j["master_seed"] = cfg.master_seed;
  j["workers"] = cfg.workers;
  j["timing"] = cfg.record_timing;
  return j.dump(2);
}

std::string gen_config_to_json_text(const simgen::GenConfig& g) {
  const json j{{"N", g.n_total},   {"p1", g.p1}, {"p2", g.p2},
               {"rho", g.rho},     {"model", std::string(simgen::to_string(g.model))},
               {"s1", g.s1},       {"c1", g.c1}, {"s2", g.s2},
               {"c2", g.c2},       {"noise_sd", g.noise_sd},
               {"seed", g.seed}};
  return j.dump(2);
}

simgen::GenConfig gen_config_from_json_text(const std::string& text) {
  simgen::GenConfig g;
  try {
    const json j = json::parse(text);
    g.n_total = j.value("N", g.n_total);
    g.p1 = j.value("p1", g.p1);
    g.p2 = j.value("p2", g.p2);
    g.rho = j.value("rho", g.rho);
    if (j.contains("model")) g.model = simgen::parse_model(j["model"].get<std::string>());
    g.s1 = j.value("s1", g.s1);
    g.c1 = j.value("c1", g.c1);
    g.s2 = j.value("s2", g.s2);
    g.c2 = j.value("c2", g.c2);
    g.noise_sd = j.value("noise_sd", g.noise_sd);
    g.seed = j.value("seed", g.seed);
  } catch (const json::exception& e) {
    config_error(std::string("bad generator config: ") + e.what());
  }
  simgen::validate(g);
  return g;
}

void apply_preset(ExperimentConfig& cfg, const std::string& name) {
  if (name == "quick") {
    cfg.replicates = 200;
    cfg.grid.p = {500, 1000};
    cfg.test.nuisance.forest.trees = 50;
  } else if (name == "paper") {
    cfg.replicates = 500;
    cfg.grid.n_total = {200, 300};
    cfg.grid.p = {1000, 1500, 2000};
    cfg.grid.rho = {0.3, 0.5, 0.7};
    cfg.grid.models = {simgen::Model::m1, simgen::Model::m2, simgen::Model::m3};
    cfg.scenarios = {
        ScenarioSpec{simgen::Scenario::s1_null, {}, {}},
        ScenarioSpec{simgen::Scenario::s2_sparse, {1, 3, 5}, {}},
        ScenarioSpec{simgen::Scenario::s3_dense, {}, {30, 50, 70}},
    };
    cfg.test.nuisance.forest.trees = 100;
  } else {
    config_error("unknown preset '" + name + "' (expected quick or paper)");
  }
}

}  // namespace plmtest::harness
