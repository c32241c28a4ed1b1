#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ltree/errors.hpp"
#include "ltree/verify_harness.hpp"

using namespace ltree;
using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path fresh_dir(const std::string& name) {
  const auto d = std::filesystem::temp_directory_path() / ("ltree_vh_" + name);
  std::filesystem::remove_all(d);
  return d;
}

json stripped(const TestReport& r) {
  json j = r.to_json();
  j.erase("runtime_s");
  return j;
}

}  // namespace

TEST_CASE("experiment registry") {
  const std::vector<std::string> expected = {
      "yule-geometric",        "grafting-equivalence", "spine-spacings", "skeleton-roundtrip",
      "lamperti-cb",           "ray-knight",           "twotype-rates",       "twotype-generator",
      "cross-construction",    "discrete-generations", "pruning-compatibility"};
  CHECK(experiment_names() == expected);
  for (const auto& n : expected) {
    CHECK(!experiment_summary(n).empty());
    CHECK(default_config(n).contains("seed"));
  }
  CHECK_THROWS_AS(default_config("nope"), UnknownExperiment);
  CHECK_THROWS_AS(run_experiment("nope", json::object(), RunOptions{}), UnknownExperiment);
}

TEST_CASE("config merging") {
  const json base = {{"seed", 1}, {"x", 0.5}, {"sub", {{"a", 1}, {"b", 2.0}}}, {"exponent", {{"alpha", 1.0}}}};
  const json m = merge_config(base, {{"x", 2}, {"sub", {{"b", 3.5}}}, {"exponent", {{"beta", 1.0}}}});
  CHECK(m["x"] == 2);
  CHECK(m["sub"]["a"] == 1);
  CHECK(m["sub"]["b"] == 3.5);
  CHECK(m["exponent"] == json{{"beta", 1.0}});
  CHECK(merge_config(base, nullptr) == base);
  CHECK_THROWS_AS(merge_config(base, {{"y", 1}}), ConfigError);
  CHECK_THROWS_AS(merge_config(base, {{"sub", {{"c", 1}}}}), ConfigError);
  CHECK_THROWS_AS(merge_config(base, {{"x", "big"}}), ConfigError);
  CHECK_THROWS_AS(merge_config(base, {{"seed", 1.5}}), ConfigError);
  CHECK_THROWS_AS(merge_config(base, json::array()), ConfigError);
}

TEST_CASE("config files") {
  const auto d = fresh_dir("cfg");
  std::filesystem::create_directories(d);
  std::ofstream(d / "a.toml") << "n = 2000\nb = 0.5\n";
  std::ofstream(d / "a.json") << R"({"n": 2000, "b": 0.5})";
  std::ofstream(d / "bad.toml") << "n = = 3\n";
  CHECK(load_config_file((d / "a.toml").string()) == load_config_file((d / "a.json").string()));
  CHECK_THROWS_AS(load_config_file((d / "bad.toml").string()), ConfigError);
  CHECK_THROWS_AS(load_config_file((d / "missing.toml").string()), ConfigError);
}

TEST_CASE("config hash") {
  const json a = {{"b", 0.7}, {"n", 10}, {"seed", 101}};
  const json b = json::parse(R"({"seed":101,"n":10,"b":0.7})");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  CHECK(config_hash(a) != config_hash(json{{"b", 0.7}, {"n", 11}, {"seed", 101}}));
  CHECK(config_hash(json::object()) == "08f44b07b5901a25");
}

TEST_CASE("parallel_for") {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), 3, [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(parallel_for(100, 3,
                               [](std::size_t i) {
                                 if (i == 37) throw ConfigError("x");
                               }),
                  ConfigError);
}

TEST_CASE("reports are deterministic and independent of jobs") {
  const std::vector<std::pair<std::string, json>> runs = {
      {"yule-geometric", {{"n", 3000}}},
      {"skeleton-roundtrip", {{"n_trees", 100}}},
      {"discrete-generations", {{"n_trees", 200}}}};
  for (const auto& [name, ov] : runs) {
    const auto d1 = fresh_dir(name + "1"), d3 = fresh_dir(name + "3");
    RunOptions o1, o3;
    o1.jobs = 1;
    o1.out_dir = d1.string();
    o3.jobs = 3;
    o3.out_dir = d3.string();
    const TestReport r1 = run_experiment(name, ov, o1), r3 = run_experiment(name, ov, o3);
    CHECK(stripped(r1) == stripped(r3));
    CHECK(r1.checks_json().dump() == r3.checks_json().dump());
    CHECK(slurp(d1 / (name + ".checks.json")) == slurp(d3 / (name + ".checks.json")));
    CHECK(slurp(d1 / (name + ".config.json")) == slurp(d3 / (name + ".config.json")));
    CHECK(r1.pass);

    const json j = json::parse(slurp(d1 / (name + ".json")));
    for (const char* k : {"name", "n", "statistic", "p_value", "pass", "seed", "config_hash", "runtime_s"})
      CHECK(j.contains(k));
    CHECK(j.size() == 8);
    CHECK(j["config_hash"] == config_hash(json::parse(slurp(d1 / (name + ".config.json")))));
    for (const auto& e : std::filesystem::directory_iterator(d1)) CHECK(e.path().extension() != ".tmp");
  }
}

TEST_CASE("seed override") {
  RunOptions o;
  o.has_seed = true;
  o.seed = 7;
  const TestReport a = run_experiment("yule-geometric", {{"n", 2000}}, o);
  CHECK(a.seed == 7);
  const TestReport b = run_experiment("yule-geometric", {{"n", 2000}}, RunOptions{});
  CHECK(b.seed == 101);
  CHECK(a.config_hash != b.config_hash);
}

TEST_CASE("atomic write") {
  const auto d = fresh_dir("atomic");
  const auto p = d / "sub" / "f.txt";
  write_file_atomic(p.string(), "one");
  write_file_atomic(p.string(), "two");
  CHECK(slurp(p) == "two");
  CHECK(!std::filesystem::exists(p.string() + ".tmp"));
}
