#include <doctest.h>

#include <cmath>

#include "ltree/errors.hpp"
#include "ltree/splitting_sim.hpp"
#include "ltree/stats.hpp"

using namespace ltree;

namespace {

LaplaceExponent quadratic(double b = 1.0) {
  LevyQuartet q;
  q.alpha = -b;
  q.beta = 1.0;
  return LaplaceExponent(q);
}

// Frequency of an event within 3 binomial standard errors of p.
void check_frequency(std::size_t hits, std::size_t n, double p) {
  const double f = static_cast<double>(hits) / static_cast<double>(n);
  CHECK(std::abs(f - p) <= 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n)));
}

}  // namespace

TEST_CASE("Yule contour counts") {
  const double b = std::log(2.0);
  std::size_t one = 0, two = 0;
  const std::size_t n = 20000;
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(31, i);
    const CadlagPath f = simulate_yule_contour(b, 1.0, rng);
    one += f.tips.size() == 1;
    two += f.tips.size() == 2;
    CHECK(f.max_value() <= 1.0);
    CHECK(f.terminal == TerminalKind::hit_zero);
  }
  check_frequency(one, n, 0.5);
  check_frequency(two, n, 0.25);
  Rng rng(32);
  for (int i = 0; i < 100; ++i) CHECK(simulate_yule_contour(1e-12, 1.0, rng).tips.size() == 1);
}

TEST_CASE("Yule contour shape") {
  Rng rng(33);
  const CadlagPath f = simulate_yule_contour(1.3, 2.0, rng);
  std::size_t jumps = 0;
  for (std::size_t i = 1; i < f.knots.size(); ++i) {
    if (f.knots[i].value != f.knots[i].left) {
      ++jumps;
      CHECK(f.knots[i].value == doctest::Approx(2.0));
    }
    if (i + 1 < f.knots.size()) {
      const double slope = (f.knots[i + 1].left - f.knots[i].value) / (f.knots[i + 1].t - f.knots[i].t);
      CHECK(slope == doctest::Approx(-1.0));
    }
  }
  CHECK(jumps + 1 == f.tips.size());
}

TEST_CASE("subcritical exponents are rejected") {
  LevyQuartet q;
  q.alpha = 1.0;
  q.beta = 1.0;
  CHECK_THROWS_AS(SplittingModel(LaplaceExponent(q)), SubcriticalInput);
  const SplittingModel m(quadratic());
  Rng rng(1);
  CHECK_THROWS_AS(m.nu_r(0.0, rng), OutOfDomain);
}

TEST_CASE("nu_r contours") {
  const SplittingModel m(quadratic());
  for (std::uint64_t i = 0; i < 200; ++i) {
    Rng a(34, i), b(34, i);
    const CadlagPath f = m.nu_r(1.0, a);
    CHECK(f.tips.size() >= 1);
    CHECK(f.max_value() <= 1.0 + 1e-12);
    CHECK(f.terminal == TerminalKind::hit_zero);
    const CadlagPath g = m.nu_r(1.0, b);
    CHECK(g.lifetime() == f.lifetime());
    CHECK(g.tips == f.tips);
  }
}

TEST_CASE("sin tree has one prolific line") {
  const SplittingModel m(quadratic());
  Rng rng(35);
  for (int i = 0; i < 300; ++i) {
    const CadlagPath f = m.sin_tree(1.0, rng);
    CHECK(f.max_value() <= 1.0 + 1e-12);
    CHECK(f.tips.size() == 1);
    CHECK(skeleton_from_contour(f).size() == 1);
  }
}

TEST_CASE("Upsilon tree without grafts") {
  // P(no graft below r) = e^{-br}.
  const SplittingModel m(quadratic(0.2));
  std::size_t bare = 0;
  const std::size_t n = 4000;
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(36, i);
    const UpsilonTree u = m.upsilon_tree(0.5, rng);
    bare += u.lines.size() == 1;
    CHECK(u.contour.tips.size() == u.lines.size());
    CHECK(skeleton_from_contour(u.contour).approx_equal(prolific_skeleton(u.lines, 0.5)));
  }
  check_frequency(bare, n, std::exp(-0.1));
}

TEST_CASE("eta_x graft counts") {
  const SplittingModel m(quadratic());
  std::vector<double> grafts;
  for (std::uint64_t i = 0; i < 2000; ++i) {
    Rng rng(37, i);
    const EtaForest f = m.eta_x(0.5, 2.0, rng);
    grafts.push_back(static_cast<double>(f.graft_heights.size()));
    CHECK(f.prolific.size() == f.graft_heights.size());
    CHECK(std::is_sorted(f.graft_heights.rbegin(), f.graft_heights.rend()));
  }
  const auto ms = stats::mean_se(grafts);
  CHECK(std::abs(ms.mean - 0.5) <= 3.0 * ms.se);
  Rng rng(38);
  const EtaForest tiny = m.eta_x(1e-12, 2.0, rng);
  CHECK(tiny.graft_heights.empty());
  CHECK(tiny.contour.lifetime() < 1e-6);
}

TEST_CASE("both post-minimum routes agree in law") {
  TreeOptions margin;
  margin.margin_route = true;
  const SplittingModel coin(quadratic()), cut(quadratic(), margin);
  std::vector<double> a, b;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    Rng r1(39, i), r2(40, i);
    a.push_back(coin.post_minimum_stage(1.0, r1).lifetime());
    b.push_back(cut.post_minimum_stage(1.0, r2).lifetime());
  }
  CHECK(stats::ks_two_sample(a, b).p_value > 1e-3);
}

TEST_CASE("node budget") {
  TreeOptions opt;
  opt.node_budget = 3;
  const SplittingModel m(quadratic(2.0), opt);
  Rng rng(41);
  CHECK_THROWS_AS(
      [&] {
        for (int i = 0; i < 100; ++i) m.upsilon_tree(5.0, rng);
      }(),
      NodeBudgetExceeded);
}
