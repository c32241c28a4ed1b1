#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ltree/errors.hpp"
#include "ltree/path_engine.hpp"
#include "ltree/stats.hpp"

using namespace ltree;

namespace {

CadlagPath poly(std::initializer_list<std::pair<double, double>> pts) {
  CadlagPath f;
  for (auto [t, v] : pts) f.push(t, v);
  return f;
}

LaplaceExponent quartet(double kappa, double alpha, double beta, std::vector<Atom> atoms = {}) {
  LevyQuartet q;
  q.kappa = kappa;
  q.alpha = alpha;
  q.beta = beta;
  q.atoms = std::move(atoms);
  return LaplaceExponent(q);
}

void check_same(const CadlagPath& a, const CadlagPath& b, double tol = 1e-12) {
  REQUIRE(a.knots.size() == b.knots.size());
  for (std::size_t i = 0; i < a.knots.size(); ++i) {
    CHECK(a.knots[i].t == doctest::Approx(b.knots[i].t).epsilon(tol));
    CHECK(a.knots[i].left == doctest::Approx(b.knots[i].left).epsilon(tol));
    CHECK(a.knots[i].value == doctest::Approx(b.knots[i].value).epsilon(tol));
  }
}

}  // namespace

TEST_CASE("evaluation and left limits") {
  CadlagPath f = poly({{0, 0}, {1, 1}});
  f.jump_to(3.0);
  f.push(2.0, 2.0);
  CHECK(f.value(0.5) == doctest::Approx(0.5));
  CHECK(f.value(1.0) == 3.0);
  CHECK(f.left_limit(1.0) == 1.0);
  CHECK(f.value(1.5) == doctest::Approx(2.5));
  CHECK(f.has_jumps());
  CHECK(f.max_value() == 3.0);
  std::ostringstream os;
  f.write_csv(os);
  CHECK(os.str().find("1,1,0\n1,3,1\n") != std::string::npos);
}

TEST_CASE("validate rejects non-increasing knots") {
  CadlagPath f;
  f.knots = {{0, 0, 0}, {1, 1, 1}, {1, 2, 2}};
  CHECK_THROWS_AS(f.validate(), MalformedPath);
}

TEST_CASE("concatenation") {
  const CadlagPath a = poly({{0, 0}, {1, 1}}), b = poly({{0, 0}, {2, 2}});
  CHECK(concatenate({a, b}).lifetime() == doctest::Approx(3.0));
  CHECK(concatenate({}).lifetime() == 0.0);
  CadlagPath inf = poly({{0, 1}, {5, 6}});
  inf.terminal = TerminalKind::infinite_proxy;
  const CadlagPath c = concatenate({a, inf});
  CHECK(c.terminal == TerminalKind::infinite_proxy);
  CHECK(c.value(0.5) == doctest::Approx(0.5));
  CHECK(c.value(1.0) == 1.0);
  CHECK_THROWS_AS(concatenate({inf, a}), InfiniteInterior);
}

TEST_CASE("time change below a level") {
  const CadlagPath tent = poly({{0, 0}, {2, 2}, {4, 0}});
  const CadlagPath g = time_change_below(tent, 1.0);
  CHECK(g.lifetime() == doctest::Approx(2.0));
  CHECK(g.max_value() == doctest::Approx(1.0));
  CHECK(g.value(1.0) == doctest::Approx(1.0));
  CHECK(g.value(1.5) == doctest::Approx(0.5));
  check_same(time_change_below(tent, 3.0), tent);
  check_same(time_change_below(g, 1.0), g);
}

TEST_CASE("time change preserves time below and is consistent") {
  Rng rng(11);
  const LaplaceExponent psi = quartet(0.0, 0.2, 0.5, {{1.0, 0.8}});
  SimOptions opt;
  for (int i = 0; i < 50; ++i) {
    const CadlagPath f = simulate_levy(psi, 1.0, StopRule::at_horizon(3.0), opt, rng);
    const CadlagPath g = time_change_below(f, 1.5);
    CHECK(g.lifetime() == doctest::Approx(time_at_or_below(f, 1.5)).epsilon(1e-9));
    CHECK(g.max_value() <= 1.5 + 1e-12);
    const CadlagPath once = time_change_below(f, 0.9), twice = time_change_below(g, 0.9);
    CHECK(once.lifetime() == doctest::Approx(twice.lifetime()).epsilon(1e-9));
    for (double s = 0.0; s < once.lifetime(); s += once.lifetime() / 17.0)
      CHECK(once.value(s) == doctest::Approx(twice.value(s)).epsilon(1e-9));
  }
}

TEST_CASE("post-minimum process") {
  CadlagPath v = poly({{0, 1}, {1, 0}, {3, 2}});
  v.terminal = TerminalKind::infinite_proxy;
  const CadlagPath g = post_minimum(v);
  CHECK(g.start_value() == 0.0);
  CHECK(g.lifetime() == doctest::Approx(2.0));
  CHECK(g.value(1.5) == doctest::Approx(1.5));

  CadlagPath j = poly({{0, 1}, {1, 0}});
  j.jump_to(0.7);
  j.push(2.0, 1.7);
  j.terminal = TerminalKind::infinite_proxy;
  const CadlagPath gj = post_minimum(j);
  CHECK(gj.start_value() == doctest::Approx(0.7));
  CHECK(gj.value(0.5) == doctest::Approx(1.2));

  CHECK_THROWS_AS(post_minimum(poly({{0, 0}, {1, 1}})), MinNotSettled);
}

TEST_CASE("deterministic Levy paths") {
  Rng rng(1);
  SimOptions opt;
  const CadlagPath line = simulate_levy(quartet(0, 1, 0), 1.0, StopRule::hit(0.0), opt, rng);
  CHECK(line.lifetime() == doctest::Approx(1.0));
  CHECK(line.terminal == TerminalKind::hit_zero);
  CHECK(line.value(0.25) == doctest::Approx(0.75));

  // Yule quartet: slope -1 from r until killing or 0.
  for (int i = 0; i < 200; ++i) {
    const CadlagPath y = simulate_levy(quartet(0.7, 1, 0), 1.0, StopRule::hit(0.0), opt, rng);
    CHECK(y.knots.size() == 2);
    CHECK(y.end_value() == doctest::Approx(1.0 - y.lifetime()));
    CHECK((y.terminal == TerminalKind::killed || y.terminal == TerminalKind::hit_zero));
  }
  const CadlagPath flat = simulate_levy(quartet(0, 0, 0), 2.0, StopRule::at_horizon(5.0), opt, rng);
  CHECK(flat.end_value() == 2.0);
  CHECK(flat.lifetime() == doctest::Approx(5.0));
}

TEST_CASE("jump counts are Poisson") {
  const LaplaceExponent psi = quartet(0, 1, 0, {{2.0, 0.5}});
  SimOptions opt;
  double sum = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    Rng rng(2, static_cast<std::uint64_t>(i));
    const CadlagPath f = simulate_levy(psi, 0.0, StopRule::at_horizon(10.0), opt, rng);
    for (std::size_t k = 1; k < f.knots.size(); ++k) sum += f.knots[k].value != f.knots[k].left;
  }
  CHECK(sum / n >= 19.0);
  CHECK(sum / n <= 21.0);
}

TEST_CASE("mean of X_T") {
  const LaplaceExponent psi = quartet(0, -0.3, 0.5, {{1.0, 0.6}, {0.5, 1.5}});
  SimOptions opt;
  std::vector<double> x;
  for (int i = 0; i < 10000; ++i) {
    Rng rng(3, static_cast<std::uint64_t>(i));
    x.push_back(simulate_levy(psi, 0.0, StopRule::at_horizon(2.0), opt, rng).end_value());
  }
  const auto m = stats::mean_se(x);
  const double slope = -(psi(1e-6) - psi(0.0)) / 1e-6;
  CHECK(std::abs(m.mean - slope * 2.0) <= 3.0 * m.se + 1e-5);
}

TEST_CASE("margin rule settles the minimum") {
  const LaplaceExponent psi = quartet(0, -1, 1);
  SimOptions opt;
  Rng rng(4);
  const double K = default_margin(psi);
  CHECK(std::exp(-psi.b() * K) == doctest::Approx(1e-6));
  const CadlagPath f = simulate_levy(psi, 0.0, StopRule::with_margin(K), opt, rng);
  CHECK(f.terminal == TerminalKind::infinite_proxy);
  const CadlagPath g = post_minimum(f);
  CHECK(g.min_value() >= -1e-12);
  CHECK(g.end_value() >= K - 1e-9);
}

TEST_CASE("samplers below r stay below r") {
  const LaplaceExponent psi = quartet(0, -1, 1);
  SimOptions opt;
  for (int i = 0; i < 100; ++i) {
    Rng rng(5, static_cast<std::uint64_t>(i));
    const CadlagPath a = simulate_below(psi, 0.5, 1.0, opt, rng);
    CHECK(a.max_value() <= 1.0 + 1e-12);
    CHECK((a.terminal == TerminalKind::hit_zero || a.terminal == TerminalKind::escaped));
    const CadlagPath b = simulate_post_minimum_below(psi, 1.0, opt, rng);
    CHECK(b.max_value() <= 1.0 + 1e-12);
    CHECK(b.min_value() >= -1e-12);
  }
}

TEST_CASE("reproducible given seed and stream") {
  const LaplaceExponent psi = quartet(0, -0.3, 0.5, {{1.0, 0.6}});
  SimOptions opt;
  Rng a(9, 4), b(9, 4), c(9, 5);
  const CadlagPath fa = simulate_levy(psi, 1.0, StopRule::at_horizon(1.0), opt, a);
  const CadlagPath fb = simulate_levy(psi, 1.0, StopRule::at_horizon(1.0), opt, b);
  const CadlagPath fc = simulate_levy(psi, 1.0, StopRule::at_horizon(1.0), opt, c);
  REQUIRE(fa.knots.size() == fb.knots.size());
  for (std::size_t i = 0; i < fa.knots.size(); ++i) CHECK(fa.knots[i].value == fb.knots[i].value);
  CHECK(fa.end_value() != fc.end_value());
}
