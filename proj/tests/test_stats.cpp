#include <doctest.h>

#include <cmath>
#include <random>

#include "ltree/errors.hpp"
#include "ltree/stats.hpp"

using namespace ltree;

namespace {

double geom_pmf(long k, double p) { return p * std::pow(1.0 - p, static_cast<double>(k - 1)); }

std::vector<long> geom_samples(std::uint64_t seed, std::size_t n, double p) {
  std::mt19937_64 g(seed);
  std::geometric_distribution<long> d(p);
  std::vector<long> out(n);
  for (auto& v : out) v = d(g) + 1;
  return out;
}

std::vector<double> exp_samples(std::uint64_t seed, std::size_t n, double rate) {
  std::mt19937_64 g(seed);
  std::exponential_distribution<double> d(rate);
  std::vector<double> out(n);
  for (auto& v : out) v = d(g);
  return out;
}

}  // namespace

TEST_CASE("tail functions") {
  CHECK(stats::chi_square_tail(3.841458820694124, 1) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(stats::chi_square_tail(18.307038053275146, 10) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(stats::chi_square_tail(2.0, 2) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(stats::kolmogorov_q(0.0) == 1.0);
  CHECK(stats::kolmogorov_q(1.3580986393225507) == doctest::Approx(0.05).epsilon(1e-8));
  CHECK(stats::kolmogorov_q(1.0) == doctest::Approx(0.26999967167735456).epsilon(1e-10));
  CHECK(stats::normal_two_sided(1.959963984540054) == doctest::Approx(0.05).epsilon(1e-9));
}

TEST_CASE("chi-square goodness of fit") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto s = geom_samples(seed, 5000, 0.3);
    const auto r = stats::chi_square_gof(s, [](long k) { return geom_pmf(k, 0.3); }, 1);
    CHECK(r.p_value > 1e-3);
    CHECK(r.bins >= 2);
  }
  const std::vector<long> constant(5000, 1);
  CHECK(stats::chi_square_gof(constant, [](long k) { return geom_pmf(k, 0.3); }, 1).p_value < 1e-6);
  CHECK(stats::chi_square_gof(geom_samples(4, 5000, 0.35), [](long k) { return geom_pmf(k, 0.3); }, 1).p_value <
        1e-3);
  CHECK_THROWS_AS(stats::chi_square_gof(geom_samples(5, 999, 0.3), [](long k) { return geom_pmf(k, 0.3); }, 1),
                  DegenerateBinning);
}

TEST_CASE("chi-square two sample") {
  for (std::uint64_t seed : {11, 12, 13})
    CHECK(stats::chi_square_two_sample(geom_samples(seed, 3000, 0.4), geom_samples(seed + 100, 4000, 0.4)).p_value >
          1e-3);
  CHECK(stats::chi_square_two_sample(geom_samples(14, 3000, 0.4), geom_samples(15, 3000, 0.5)).p_value < 1e-3);
}

TEST_CASE("Kolmogorov-Smirnov") {
  const auto cdf = [](double x) { return -std::expm1(-x); };
  for (std::uint64_t seed : {21, 22, 23}) {
    CHECK(stats::ks_one_sample(exp_samples(seed, 2000, 1.0), cdf).p_value > 1e-3);
    CHECK(stats::ks_two_sample(exp_samples(seed, 2000, 1.0), exp_samples(seed + 50, 1500, 1.0)).p_value > 1e-3);
  }
  CHECK(stats::ks_one_sample(exp_samples(24, 2000, 2.0), cdf).p_value < 1e-6);
  CHECK(stats::ks_two_sample(exp_samples(25, 2000, 1.0), exp_samples(26, 2000, 2.0)).p_value < 1e-6);
  const auto same = exp_samples(27, 800, 1.0);
  const auto r = stats::ks_two_sample(same, same);
  CHECK(r.statistic == 0.0);
  CHECK(r.p_value == 1.0);
  // ties: two identical discrete samples
  std::vector<double> a(600, 1.0), b(600, 1.0);
  for (std::size_t i = 0; i < 300; ++i) a[i] = b[i] = 0.0;
  CHECK(stats::ks_two_sample(a, b).statistic == 0.0);
  CHECK_THROWS_AS(stats::ks_two_sample(exp_samples(28, 499, 1.0), exp_samples(29, 800, 1.0)), DegenerateBinning);
}

TEST_CASE("mean and standard error") {
  const auto m = stats::mean_se({1.0, 2.0, 3.0, 4.0});
  CHECK(m.mean == 2.5);
  CHECK(m.sd == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(m.se == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
  CHECK(m.n == 4);
}
