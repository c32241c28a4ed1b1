#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace ltree {

// One tested property inside an experiment. p_value is NaN for checks judged
// by a tolerance only.
struct Check {
  std::string name;
  double statistic = 0.0;
  double p_value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  nlohmann::json detail = nlohmann::json::object();
};

struct TestReport {
  std::string name;
  std::size_t n = 0;
  double statistic = 0.0;
  double p_value = 0.0;
  bool pass = false;
  std::uint64_t seed = 0;
  std::string config_hash;
  double runtime_s = 0.0;
  std::vector<Check> checks;

  // {name, n, statistic, p_value, pass, seed, config_hash, runtime_s}
  nlohmann::json to_json() const;
  nlohmann::json checks_json() const;
};

// FNV-1a 64 of the compact dump of a JSON value (object keys sorted), as 16
// hex digits.
std::string config_hash(const nlohmann::json& config);

// Runs fn(0..n-1) on `jobs` threads (0: hardware concurrency). The first
// exception thrown by any call is rethrown after all workers stop.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn);

struct RunOptions {
  bool has_seed = false;
  std::uint64_t seed = 0;  // overrides the experiment's dedicated seed
  std::string out_dir;     // empty: no files written
  unsigned jobs = 0;
  double p_floor = 1e-3;
};

const std::vector<std::string>& experiment_names();
std::string experiment_summary(const std::string& name);
nlohmann::json default_config(const std::string& name);
// Overrides must only use keys present in `base` (recursively for objects,
// except "exponent" values which are replaced whole).
nlohmann::json merge_config(const nlohmann::json& base, const nlohmann::json& overrides);
// Reads TOML unless the file name ends in .json.
nlohmann::json load_config_file(const std::string& path);

TestReport run_experiment(const std::string& name, const nlohmann::json& overrides, const RunOptions& opt);

// Writes <dir>/<name>.json and <dir>/<name>.checks.json through a temporary
// file and a rename.
void write_report(const TestReport& r, const std::string& dir);
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace ltree
