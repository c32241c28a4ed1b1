#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ltree/stats.hpp"
#include "ltree/verify_harness.hpp"

namespace ltree::detail {

class ExperimentContext {
 public:
  ExperimentContext(const nlohmann::json& cfg, std::uint64_t seed, unsigned jobs, double p_floor)
      : cfg(cfg), seed(seed), jobs(jobs), p_floor(p_floor) {}

  const nlohmann::json& cfg;
  std::uint64_t seed;
  unsigned jobs;
  double p_floor;
  std::size_t n = 0;
  std::vector<Check> checks;
  // (file name, content) pairs written next to the report.
  std::vector<std::pair<std::string, std::string>> files;

  double num(const char* key) const { return cfg.at(key).get<double>(); }
  std::size_t count(const char* key) const { return cfg.at(key).get<std::size_t>(); }

  // Passes when p > p_floor.
  Check& p_check(const std::string& name, const stats::TestResult& r, nlohmann::json detail = {});
  // Passes when |estimate - target| <= k se (k = tolerance).
  Check& z_check(const std::string& name, double estimate, double se, double target, double k = 3.0,
                 nlohmann::json detail = {});
  // Passes when |value - target| <= tol.
  Check& abs_check(const std::string& name, double value, double target, double tol, nlohmann::json detail = {});
  Check& exact_check(const std::string& name, std::size_t mismatches, std::size_t total,
                     nlohmann::json detail = {});
};

struct ExperimentDef {
  std::string name;
  std::string summary;
  nlohmann::json defaults;
  std::function<void(ExperimentContext&)> run;
};

const std::vector<ExperimentDef>& registry();

}  // namespace ltree::detail
