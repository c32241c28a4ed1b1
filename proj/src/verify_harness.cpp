#include "ltree/verify_harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "experiments.hpp"
#include "ltree/errors.hpp"
#include "ltree/levy_model.hpp"

namespace ltree {

namespace {

nlohmann::json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

const detail::ExperimentDef& find_experiment(const std::string& name) {
  for (const auto& d : detail::registry())
    if (d.name == name) return d;
  throw UnknownExperiment("no experiment named '" + name + "'");
}

}  // namespace

nlohmann::json TestReport::to_json() const {
  return {{"name", name},
          {"n", n},
          {"statistic", finite_or_null(statistic)},
          {"p_value", p_value},
          {"pass", pass},
          {"seed", seed},
          {"config_hash", config_hash},
          {"runtime_s", runtime_s}};
}

nlohmann::json TestReport::checks_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : checks) {
    arr.push_back({{"name", c.name},
                   {"statistic", finite_or_null(c.statistic)},
                   {"p_value", finite_or_null(c.p_value)},
                   {"tolerance", finite_or_null(c.tolerance)},
                   {"pass", c.pass},
                   {"detail", c.detail}});
  }
  return {{"name", name}, {"checks", arr}};
}

std::string config_hash(const nlohmann::json& config) {
  const std::string s = config.dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(n, 1)));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < jobs; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        if (failed.load()) return;
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!err) err = std::current_exception();
          failed = true;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& d : detail::registry()) v.push_back(d.name);
    return v;
  }();
  return names;
}

std::string experiment_summary(const std::string& name) { return find_experiment(name).summary; }

nlohmann::json default_config(const std::string& name) { return find_experiment(name).defaults; }

nlohmann::json merge_config(const nlohmann::json& base, const nlohmann::json& overrides) {
  if (overrides.is_null()) return base;
  if (!overrides.is_object()) throw ConfigError("configuration must be a table");
  nlohmann::json out = base;
  for (auto it = overrides.begin(); it != overrides.end(); ++it) {
    if (!base.contains(it.key())) throw ConfigError("unknown configuration key '" + it.key() + "'");
    const auto& cur = base.at(it.key());
    const bool whole = it.key().rfind("exponent", 0) == 0;
    if (cur.is_object() && !whole) {
      out[it.key()] = merge_config(cur, *it);
    } else if (cur.is_number() && !it->is_number()) {
      throw ConfigError("configuration key '" + it.key() + "' must be a number");
    } else if (cur.is_number_integer() && !it->is_number_integer()) {
      throw ConfigError("configuration key '" + it.key() + "' must be an integer");
    } else {
      out[it.key()] = *it;
    }
  }
  return out;
}

nlohmann::json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const bool is_json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
  try {
    return parse_structured_text(ss.str(), is_json);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("cannot parse ") + path + ": " + e.what());
  }
}

TestReport run_experiment(const std::string& name, const nlohmann::json& overrides, const RunOptions& opt) {
  const auto& def = find_experiment(name);
  nlohmann::json cfg = merge_config(def.defaults, overrides);
  if (opt.has_seed) cfg["seed"] = opt.seed;
  const std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();
  const auto start = std::chrono::steady_clock::now();
  detail::ExperimentContext ctx(cfg, seed, opt.jobs, opt.p_floor);
  def.run(ctx);
  TestReport r;
  r.name = name;
  r.n = ctx.n;
  r.seed = seed;
  r.config_hash = config_hash(cfg);
  r.checks = std::move(ctx.checks);
  r.pass = !r.checks.empty();
  r.p_value = 1.0;
  r.statistic = 0.0;
  bool first = true;
  for (const auto& c : r.checks) {
    r.pass = r.pass && c.pass;
    const double p = std::isfinite(c.p_value) ? c.p_value : (c.pass ? 1.0 : 0.0);
    if (first || p < r.p_value) {
      r.p_value = p;
      r.statistic = c.statistic;
      first = false;
    }
  }
  r.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!opt.out_dir.empty()) {
    write_report(r, opt.out_dir);
    for (const auto& [file, content] : ctx.files)
      write_file_atomic((std::filesystem::path(opt.out_dir) / file).string(), content);
    write_file_atomic((std::filesystem::path(opt.out_dir) / (name + ".config.json")).string(),
                      cfg.dump(2) + "\n");
  }
  return r;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  const std::filesystem::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << content;
    if (!out) throw ConfigError("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, p);
}

void write_report(const TestReport& r, const std::string& dir) {
  const std::filesystem::path d(dir);
  write_file_atomic((d / (r.name + ".json")).string(), r.to_json().dump(2) + "\n");
  write_file_atomic((d / (r.name + ".checks.json")).string(), r.checks_json().dump(2) + "\n");
}

namespace detail {

Check& ExperimentContext::p_check(const std::string& name, const stats::TestResult& r, nlohmann::json detail) {
  Check c;
  c.name = name;
  c.statistic = r.statistic;
  c.p_value = r.p_value;
  c.tolerance = p_floor;
  c.pass = r.p_value > p_floor;
  if (detail.is_null()) detail = nlohmann::json::object();
  if (r.dof > 0.0) {
    detail["dof"] = r.dof;
    detail["cells"] = r.bins;
  }
  c.detail = std::move(detail);
  checks.push_back(std::move(c));
  return checks.back();
}

Check& ExperimentContext::z_check(const std::string& name, double estimate, double se, double target, double k,
                                  nlohmann::json detail) {
  Check c;
  c.name = name;
  const double z = se > 0.0 ? (estimate - target) / se : (estimate == target ? 0.0 : INFINITY);
  c.statistic = z;
  c.p_value = std::isfinite(z) ? stats::normal_two_sided(z) : 0.0;
  c.tolerance = k;
  c.pass = std::abs(z) <= k;
  if (detail.is_null()) detail = nlohmann::json::object();
  detail["estimate"] = estimate;
  detail["se"] = se;
  detail["target"] = target;
  c.detail = std::move(detail);
  checks.push_back(std::move(c));
  return checks.back();
}

Check& ExperimentContext::abs_check(const std::string& name, double value, double target, double tol,
                                    nlohmann::json detail) {
  Check c;
  c.name = name;
  c.statistic = std::abs(value - target);
  c.p_value = std::numeric_limits<double>::quiet_NaN();
  c.tolerance = tol;
  c.pass = std::isfinite(c.statistic) && c.statistic <= tol;
  if (detail.is_null()) detail = nlohmann::json::object();
  detail["value"] = finite_or_null(value);
  detail["target"] = finite_or_null(target);
  c.detail = std::move(detail);
  checks.push_back(std::move(c));
  return checks.back();
}

Check& ExperimentContext::exact_check(const std::string& name, std::size_t mismatches, std::size_t total,
                                      nlohmann::json detail) {
  Check c;
  c.name = name;
  c.statistic = static_cast<double>(mismatches);
  c.p_value = std::numeric_limits<double>::quiet_NaN();
  c.tolerance = 0.0;
  c.pass = mismatches == 0 && total > 0;
  if (detail.is_null()) detail = nlohmann::json::object();
  detail["mismatches"] = mismatches;
  detail["total"] = total;
  c.detail = std::move(detail);
  checks.push_back(std::move(c));
  return checks.back();
}

}  // namespace detail

}  // namespace ltree
