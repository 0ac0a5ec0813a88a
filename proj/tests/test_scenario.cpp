#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "htlab/errors.hpp"
#include "htlab/scenario.hpp"
#include "json.hpp"

using namespace htlab;
namespace fs = std::filesystem;

namespace {

// Scratch area for config/graph fixtures written by these tests.
struct Fixture {
  fs::path dir;

  Fixture() {
    dir = fs::path("scenario_fixture");
    fs::create_directories(dir);
  }

  std::string write(const std::string& name, const std::string& contents) {
    const fs::path p = dir / name;
    std::ofstream out(p);
    out << contents;
    return p.string();
  }

  std::string write_json(const std::string& name, const nlohmann::json& j) {
    return write(name, j.dump(2));
  }
};

nlohmann::json base_config(Fixture& fx) {
  const std::string graph = fx.write_json(
      "edge.json", {{"n", 2}, {"neighborhoods", {{1}, {0}}}});
  nlohmann::json cfg;
  cfg["graph_file"] = graph;
  cfg["model"] = "binary";
  cfg["design"] = {{"kind", "bernoulli"}, {"p", 0.5}};
  cfg["estimand"] = {{"preset", "TTE"}};
  cfg["tasks"] = {"propensity"};
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(HTLAB_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("config parsing applies defaults") {
  Fixture fx;
  const std::string path = fx.write_json("minimal.json", base_config(fx));
  const ScenarioConfig cfg = parse_config(path);
  CHECK(cfg.mode == "exact");
  CHECK(cfg.workers == 1);
  CHECK(cfg.seed == 1);
  CHECK(cfg.out_dir == "out");
  CHECK(cfg.estimand_preset == "TTE");
}

TEST_CASE("config errors name the offending field") {
  Fixture fx;

  nlohmann::json bad_kind = base_config(fx);
  bad_kind["design"] = {{"kind", "bogus"}};
  CHECK_THROWS_WITH_AS(parse_config(fx.write_json("bad_kind.json", bad_kind)),
                       doctest::Contains("design.kind"), ConfigError);
  try {
    parse_config(fx.write_json("bad_kind.json", bad_kind));
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("bernoulli") != std::string::npos);
    CHECK(std::string(e.what()).find("crd") != std::string::npos);
  }

  nlohmann::json missing = base_config(fx);
  missing.erase("model");
  CHECK_THROWS_WITH_AS(parse_config(fx.write_json("missing.json", missing)),
                       doctest::Contains("model"), ConfigError);

  nlohmann::json no_tasks = base_config(fx);
  no_tasks["tasks"] = nlohmann::json::array();
  CHECK_THROWS_WITH_AS(parse_config(fx.write_json("no_tasks.json", no_tasks)),
                       doctest::Contains("tasks"), ConfigError);

  nlohmann::json two_sources = base_config(fx);
  two_sources["table"] = {{"source", "file"}, {"path", "t.csv"}, {"seed", 3}};
  CHECK_THROWS_WITH_AS(parse_config(fx.write_json("two_sources.json", two_sources)),
                       doctest::Contains("exactly one source"), ConfigError);
}

TEST_CASE("n_1 larger than the independent set is rejected") {
  Fixture fx;
  const std::string graph = fx.write_json(
      "path3.json", {{"n", 3}, {"neighborhoods", {{1}, {0, 2}, {1}}}});
  nlohmann::json cfg = base_config(fx);
  cfg["graph_file"] = graph;
  cfg["design"] = {{"kind", "independent_set_ate"}, {"n_1", 5}};
  const ScenarioConfig parsed = parse_config(fx.write_json("is.json", cfg));
  CHECK_THROWS_WITH_AS(instantiate(parsed), doctest::Contains("independent set"),
                       ConfigError);
}

TEST_CASE("propensity task emits the enumerated value") {
  Fixture fx;
  nlohmann::json cfg = base_config(fx);
  cfg["out_dir"] = (fx.dir / "out_propensity").string();
  const ScenarioConfig parsed = parse_config(fx.write_json("prop.json", cfg));
  const RunResult result = run_scenario(parsed);
  CHECK(result.files_written.size() >= 2);
  const std::string csv = slurp(fs::path(parsed.out_dir) / "propensity.csv");
  CHECK(csv.find("0,1,1,0.25,exact,") != std::string::npos);
  CHECK(csv.find("0,1,1,0.25,analytic,") != std::string::npos);
  CHECK(slurp(fs::path(parsed.out_dir) / "manifest.json").find("config_hash") !=
        std::string::npos);
}

TEST_CASE("classify task reports the fixed-exposure verdict") {
  Fixture fx;
  const std::string graph = fx.write_json(
      "path3.json", {{"n", 3}, {"neighborhoods", {{1}, {0, 2}, {1}}}});
  nlohmann::json cfg = base_config(fx);
  cfg["graph_file"] = graph;
  cfg["design"] = {{"kind", "independent_set_ate"}, {"n_1", 1}};
  cfg["estimand"] = {{"preset", "DIRECT"}};
  cfg["tasks"] = {"classify"};
  cfg["out_dir"] = (fx.dir / "out_classify").string();
  run_scenario(parse_config(fx.write_json("classify.json", cfg)));
  const nlohmann::json verdict =
      nlohmann::json::parse(slurp(fx.dir / "out_classify" / "classify.json"));
  CHECK(verdict.at("verdict") == "Fixed");
  CHECK(verdict.at("tau1").at("variance") == 0.0);
}

TEST_CASE("reruns are byte-identical for numeric outputs") {
  Fixture fx;
  nlohmann::json cfg = base_config(fx);
  cfg["tasks"] = {"propensity", "moments", "dominance"};
  cfg["table"] = {{"source", "random"}, {"box", {-1.0, 1.0}}, {"seed", 5}};
  cfg["mode"] = "mc";
  cfg["mc_reps"] = 5000;
  cfg["seed"] = 31;

  for (const int workers : {1, 2}) {
    cfg["workers"] = workers;
    cfg["out_dir"] = (fx.dir / ("rerun_a_w" + std::to_string(workers))).string();
    const std::string path = fx.write_json("rerun.json", cfg);
    run_scenario(parse_config(path));
    const std::string out_b = (fx.dir / ("rerun_b_w" + std::to_string(workers))).string();
    ScenarioOverrides overrides;
    overrides.out_dir = out_b;
    run_scenario(parse_config(path), overrides);
    for (const std::string name : {"propensity.csv", "moments.csv", "dominance.csv"}) {
      const std::string a = slurp(fs::path(cfg["out_dir"].get<std::string>()) / name);
      const std::string b = slurp(fs::path(out_b) / name);
      CHECK(a == b);
      CHECK_FALSE(a.empty());
    }
  }
}

TEST_CASE("cli exit codes") {
  Fixture fx;

  // 2: config error.
  const std::string bad = fx.write("broken.json", "{ not json");
  CHECK(run_cli("run " + bad) == 2);

  // 3: enumeration budget exceeded (2^30 support points).
  nlohmann::json::array_t empty_neighborhoods;
  for (int i = 0; i < 30; ++i) empty_neighborhoods.push_back(nlohmann::json::array());
  const std::string big_graph = fx.write_json(
      "big.json", {{"n", 30}, {"neighborhoods", empty_neighborhoods}});
  nlohmann::json budget = base_config(fx);
  budget["graph_file"] = big_graph;
  budget["estimand"] = {{"preset", "DIRECT"}};
  budget["out_dir"] = (fx.dir / "out_budget").string();
  CHECK(run_cli("run " + fx.write_json("budget.json", budget)) == 3);

  // 4: positivity failure in a task that requires strict weights.
  const std::string star = fx.write_json(
      "star4.json", {{"n", 4}, {"neighborhoods", {{1, 2, 3}, {0}, {0}, {0}}}});
  nlohmann::json pos = base_config(fx);
  pos["graph_file"] = star;
  pos["design"] = {{"kind", "crd"}, {"n_t", 2}};
  pos["tasks"] = {"moments"};
  pos["table"] = {{"source", "random"}, {"box", {0.0, 1.0}}, {"seed", 2}};
  pos["out_dir"] = (fx.dir / "out_pos").string();
  CHECK(run_cli("run " + fx.write_json("pos.json", pos)) == 4);

  // 0: a healthy run.
  nlohmann::json good = base_config(fx);
  good["out_dir"] = (fx.dir / "out_good").string();
  CHECK(run_cli("run " + fx.write_json("good.json", good)) == 0);
}
