#include <cstdio>
#include <exception>
#include <string>

#include "ltree/verify_harness.hpp"

// Runs every experiment with its default configuration and seed.
int main(int argc, char** argv) {
  ltree::RunOptions opt;
  if (argc > 1) opt.out_dir = argv[1];
  const auto& names = ltree::experiment_names();
  int failed = 0;
  for (std::size_t i = 0; i < names.size(); ++i) {
    try {
      const ltree::TestReport r = ltree::run_experiment(names[i], nlohmann::json::object(), opt);
      std::printf("criterion %zu %s: %s p=%g n=%zu seed=%llu (%.1f s)\n", i + 1, names[i].c_str(),
                  r.pass ? "PASS" : "FAIL", r.p_value, r.n, static_cast<unsigned long long>(r.seed), r.runtime_s);
      if (!r.pass) {
        ++failed;
        for (const auto& c : r.checks)
          if (!c.pass) std::printf("  failed check %s: statistic=%g p=%g\n", c.name.c_str(), c.statistic, c.p_value);
      }
    } catch (const std::exception& e) {
      std::printf("criterion %zu %s: FAIL error: %s\n", i + 1, names[i].c_str(), e.what());
      ++failed;
    }
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", names.size() - failed, names.size());
  return failed == 0 ? 0 : 1;
}
