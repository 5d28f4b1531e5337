#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "curvctmc/error.hpp"
#include "curvctmc/harness.hpp"

using namespace curvctmc;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const char* base = std::getenv("CURVCTMC_TEST_DIR");
  fs::path dir = fs::path(base ? base : fs::temp_directory_path().string()) / "harness_scratch" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const fs::path& p, const json& j) { std::ofstream(p) << j.dump(2); }

ExperimentConfig parse(const char* text, const CliOverrides& o = {}) {
  return parse_config(json::parse(text), ".", o);
}

bool config_error(const char* text) {
  try {
    parse(text);
  } catch (const Error& e) {
    return e.code() == ErrorCode::Config || e.code() == ErrorCode::Reducible;
  }
  return false;
}

const char* kTail = R"({
  "scenario": "ehrenfest", "chain": {"n": 20, "lambda": 0.5, "nu": 0.5},
  "x0": 10, "t": 0.5, "y_grid": [1, 2, 3], "n_paths": 3000, "seed": 5
})";

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = parse(kTail);
  REQUIRE(cfg.chain);
  CHECK(cfg.chain->name == "ehrenfest");
  CHECK(cfg.x0 == 10);
  CHECK(cfg.times == std::vector<double>{0.5});
  CHECK(cfg.n_paths == 3000);
  CHECK(cfg.seed == 5);
  CHECK(cfg.variants == std::vector<Variant>{Variant::Standard});

  const auto both = parse(R"({"variant": "both", "t": "stationary", "bounds": "cor49"})");
  CHECK(both.variants.size() == 2);
  CHECK(std::isinf(both.times[0]));
  CHECK(both.bounds == std::vector<std::string>{"cor49"});

  const auto table = parse(R"({"function": {"table": [0, 1, 4]}})");
  CHECK(table.function == "table");
  CHECK(table.table.size() == 3);
}

TEST_CASE("config errors") {
  CHECK(config_error(R"({"scenario": "mg1"})"));
  CHECK(config_error(R"({"scenario": "ehrenfest", "chain": {"n": 4, "lambda": 0.5}})"));
  CHECK(config_error(R"({"scenario": "custom"})"));
  CHECK(config_error(R"({"scenario": "custom", "chain_file": "missing.json"})"));
  CHECK(config_error(R"({"function": "square"})"));
  CHECK(config_error(R"({"times": [1, 0.5]})"));
  CHECK(config_error(R"({"times": []})"));
  CHECK(config_error(R"({"y_grid": [2, 1]})"));
  CHECK(config_error(R"({"confidence": 0.3})"));
  CHECK(config_error(R"({"bounds": ["thm99"]})"));
  CHECK(config_error(R"({"variant": "gaussian"})"));
  CHECK(config_error(R"({"bound_scale": 0})"));
  CHECK(config_error(R"({"criteria": [13]})"));
  CHECK(config_error(R"({"n_paths": 0})"));
  CHECK(config_error(R"({"n_paths": "many"})"));
  CHECK(config_error(R"({"scenario": "ehrenfest", "chain": {"n": 4, "lambda": 0.5, "nu": 0.5}, "x0": 5})"));
  CHECK(config_error(R"([1, 2])"));
  CHECK(config_error(
      R"({"scenario": "custom", "chain": {"n": 2, "lambda": [1, 0, 0], "nu": [0, 1, 1]}})"));
  CHECK_THROWS_AS(load_config("/nonexistent/config.json", {}), Error);
}

TEST_CASE("overrides") {
  CliOverrides o;
  o.seed = 99;
  o.paths = 10;
  o.out = "elsewhere";
  const auto cfg = parse(kTail, o);
  CHECK(cfg.seed == 99);
  CHECK(cfg.n_paths == 10);
  CHECK(cfg.out == fs::path("elsewhere"));
  CHECK(cfg.snapshot.at("seed") == 99);
  CHECK(cfg.snapshot.at("n_paths") == 10);
  CHECK_FALSE(cfg.snapshot.contains("out"));
}

TEST_CASE("run ids") {
  const auto a = parse(kTail);
  CHECK(run_id(a).size() == 16);
  CHECK(run_id(a) == run_id(parse(kTail)));
  CliOverrides out_only;
  out_only.out = "somewhere/else";
  CHECK(run_id(parse(kTail, out_only)) == run_id(a));
  CliOverrides seed;
  seed.seed = 6;
  CHECK(run_id(parse(kTail, seed)) != run_id(a));
  CliOverrides paths;
  paths.paths = 3001;
  CHECK(run_id(parse(kTail, paths)) != run_id(a));
}

TEST_CASE("custom chain files are inlined into the snapshot") {
  const fs::path dir = scratch("chain_file");
  write(dir / "chain.json", json::parse(R"({"n": 2, "lambda": [1, 1, 0], "nu": [0, 1, 1]})"));
  write(dir / "config.json", json::parse(R"({"scenario": "custom", "chain_file": "chain.json"})"));
  const auto cfg = load_config(dir / "config.json", {});
  REQUIRE(cfg.chain);
  CHECK(cfg.chain->rates.size() == 3);
  CHECK_FALSE(cfg.snapshot.contains("chain_file"));
  CHECK(cfg.snapshot.at("chain").at("lambda") == json({1.0, 1.0, 0.0}));
}

TEST_CASE("tail runs are reproducible byte for byte") {
  const fs::path dir = scratch("rerun");
  write(dir / "tail.json", json::parse(kTail));
  CliOverrides o;
  o.out = dir / "results";
  std::ostringstream log1;
  std::ostringstream log2;
  std::ostringstream err;
  const int first = run_command("tail", dir / "tail.json", o, log1, err);
  CHECK(first == kExitPass);
  const fs::path run = dir / "results" / run_id(load_config(dir / "tail.json", o));
  REQUIRE(fs::exists(run / "tails.csv"));
  const std::string tails = slurp(run / "tails.csv");
  const std::string bounds = slurp(run / "bounds.csv");
  CHECK(tails.rfind("y,k,n,p_hat,upper_0.99,analytic_bound,pass\n", 0) == 0);

  const int second = run_command("tail", dir / "tail.json", o, log2, err);
  CHECK(second == first);
  CHECK(slurp(run / "tails.csv") == tails);
  CHECK(slurp(run / "bounds.csv") == bounds);

  const json manifest = json::parse(slurp(run / "manifest.json"));
  CHECK(manifest.at("command") == "tail");
  CHECK(manifest.at("exit_code") == first);
  CHECK(manifest.at("seed") == 5);
  CHECK(manifest.at("outputs") == json({"tails.csv", "bounds.csv"}));
  CHECK(manifest.at("checks").size() == 3);
  for (const auto& entry : fs::directory_iterator(run)) {
    CHECK(entry.path().extension() != ".tmp");
  }

  // Feeding the manifest back in repeats the run.
  const fs::path again = dir / "again";
  CliOverrides o2;
  o2.out = again;
  std::ostringstream log3;
  CHECK(run_command("tail", run / "manifest.json", o2, log3, err) == first);
  CHECK(slurp(again / run.filename() / "tails.csv") == tails);
}

TEST_CASE("worker count does not change results") {
  const fs::path dir = scratch("workers");
  json one = json::parse(kTail);
  one["workers"] = 1;
  json many = one;
  many["workers"] = 7;
  write(dir / "one.json", one);
  write(dir / "many.json", many);
  CliOverrides o;
  o.out = dir / "results";
  std::ostringstream log;
  std::ostringstream err;
  run_command("tail", dir / "one.json", o, log, err);
  run_command("tail", dir / "many.json", o, log, err);
  const auto a = slurp(dir / "results" / run_id(load_config(dir / "one.json", o)) / "tails.csv");
  const auto b = slurp(dir / "results" / run_id(load_config(dir / "many.json", o)) / "tails.csv");
  CHECK_FALSE(a.empty());
  CHECK(a == b);
}

TEST_CASE("errors map to the configuration exit code") {
  const fs::path dir = scratch("errors");
  CliOverrides o;
  o.out = dir / "results";
  std::ostringstream log;
  std::ostringstream err;
  CHECK(run_command("tail", dir / "missing.json", o, log, err) == kExitConfig);
  CHECK(err.str().find("cannot open config") != std::string::npos);

  std::ofstream(dir / "broken.json") << "{ not json";
  CHECK(run_command("bound", dir / "broken.json", o, log, err) == kExitConfig);
  CHECK(err.str().find("malformed config") != std::string::npos);

  write(dir / "no_grid.json", json::parse(R"({"params": {"lip": 1, "b": 1, "V2": 1, "K": 0}})"));
  CHECK(run_command("bound", dir / "no_grid.json", o, log, err) == kExitConfig);

  write(dir / "ok.json", json::parse(R"({"y_grid": [1], "params": {"lip": 1, "b": 1, "V2": 1, "K": 0}})"));
  CHECK(run_command("simulate", dir / "ok.json", o, log, err) == kExitConfig);
  CHECK(run_command("bound", dir / "ok.json", o, log, err) == kExitPass);
}

TEST_CASE("bound command output") {
  const fs::path dir = scratch("bound");
  write(dir / "b.json", json::parse(R"({
    "t": 1, "y_grid": [1, 3], "bounds": ["thm31"], "variant": "both",
    "params": {"lip": 1, "b": 1, "V2": 1, "K": 0}
  })"));
  CliOverrides o;
  o.out = dir / "results";
  std::ostringstream log;
  std::ostringstream err;
  REQUIRE(run_command("bound", dir / "b.json", o, log, err) == kExitPass);
  const auto csv = slurp(dir / "results" / run_id(load_config(dir / "b.json", o)) / "bounds.csv");
  CHECK(csv.rfind("bound,variant,y,value,flags\n", 0) == 0);
  CHECK(csv.find("thm31,standard,3,0.12500000000000") != std::string::npos);
  CHECK(log.str().find("tightest thm31/bennett") != std::string::npos);
}
