#include <doctest.h>

#include <cmath>

#include "ltree/errors.hpp"
#include "ltree/levy_model.hpp"

using namespace ltree;

namespace {

LaplaceExponent quadratic() {
  LevyQuartet q;
  q.alpha = -1.0;
  q.beta = 1.0;
  return LaplaceExponent(q);
}

LaplaceExponent yule(double b) {
  LevyQuartet q;
  q.kappa = b;
  q.alpha = 1.0;
  return LaplaceExponent(q);
}

LaplaceExponent with_jumps() {
  LevyQuartet q;
  q.alpha = -0.5;
  q.beta = 0.7;
  q.atoms = {{1.0, 1.0}, {0.5, 0.3}};
  q.exp_component = ExpComponent{0.8, 2.0};
  return LaplaceExponent(q);
}

}  // namespace

TEST_CASE("psi values") {
  CHECK(quadratic().psi(2.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(yule(0.7).psi(0.0) == doctest::Approx(-0.7));
  CHECK(with_jumps().psi(0.0) == 0.0);
}

TEST_CASE("psi of an atom matches the Levy-Khintchine integrand") {
  LevyQuartet q;
  q.alpha = 0.3;
  q.beta = 0.2;
  q.atoms = {{2.0, 0.5}, {1.0, 3.0}};
  const LaplaceExponent psi(q);
  const double l = 1.7;
  const double expected = 0.3 * l + 0.2 * l * l + 2.0 * (std::exp(-l * 0.5) - 1.0 + l * 0.5) +
                          1.0 * (std::exp(-l * 3.0) - 1.0);
  CHECK(psi(l) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("exponential component in closed form") {
  LevyQuartet q;
  q.exp_component = ExpComponent{1.5, 2.0};
  const LaplaceExponent psi(q);
  // Midpoint-rule quadrature of int (e^{-lx} - 1 + lx 1{x<=1}) 1.5 * 2 e^{-2x} dx.
  const double l = 0.9;
  double sum = 0.0;
  const double dx = 1e-5;
  for (double x = dx / 2; x < 40.0; x += dx)
    sum += (std::exp(-l * x) - 1.0 + (x <= 1.0 ? l * x : 0.0)) * 3.0 * std::exp(-2.0 * x) * dx;
  CHECK(psi(l) == doctest::Approx(sum).epsilon(1e-7));
}

TEST_CASE("largest root") {
  CHECK(std::abs(quadratic().b() - 1.0) <= 1e-10);
  CHECK(yule(0.7).b() == doctest::Approx(0.7).epsilon(1e-12));
  LevyQuartet crit;
  crit.beta = 1.0;
  CHECK(LaplaceExponent(crit).b() == 0.0);
  CHECK(largest_root([](double l) { return l * l - 3.0 * l; }) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("psi vanishes at b and is convex") {
  for (const auto& psi : {quadratic(), yule(0.4), with_jumps()}) {
    const double tol = 1e-10 * std::max(1.0, std::abs(psi(psi.b() + 1.0)));
    CHECK(std::abs(psi(psi.b())) <= tol);
    for (int i = 0; i < 1000; ++i) {
      const double l1 = 0.1 * (i % 97), l3 = l1 + 0.37 * (1 + i % 13), l2 = 0.5 * (l1 + l3);
      CHECK(psi(l2) <= 0.5 * (psi(l1) + psi(l3)) + 1e-9);
    }
  }
}

TEST_CASE("shifted exponent") {
  CHECK(quadratic().psi_sharp(1.0) == doctest::Approx(2.0));
  CHECK(std::abs(quadratic().psi_sharp(0.0)) < 1e-10);
  CHECK(yule(0.7).psi_sharp(0.3) == doctest::Approx(0.3));
  const LaplaceExponent p = with_jumps();
  const LaplaceExponent s = p.sharp();
  for (double l : {0.0, 0.5, 2.0, 7.0}) CHECK(s(l) == doctest::Approx(p(l + p.b())).epsilon(1e-10));
  CHECK(s.b() == 0.0);
}

TEST_CASE("immigration mechanism") {
  const LaplaceExponent q = quadratic();
  CHECK(q.phi(3.0) == doctest::Approx(6.0));
  CHECK(q.phi_integral_form(3.0) == doctest::Approx(6.0));
  CHECK(q.phi(0.0) == doctest::Approx(0.0));
  CHECK(yule(0.7).phi(2.0) == doctest::Approx(1.0));
  CHECK(yule(0.7).phi_form_gap() == doctest::Approx(1.0));
  const LaplaceExponent p = with_jumps();
  double prev = -1.0;
  for (double l = 0.1; l <= 50.0; l += 0.1) {
    const double f = p.phi(l);
    CHECK(std::abs(f - p.phi_integral_form(l)) <= 1e-9 * (1.0 + std::abs(f)));
    CHECK(f >= prev);
    prev = f;
  }
  LevyQuartet crit;
  crit.beta = 1.0;
  CHECK_THROWS_AS(LaplaceExponent(crit).phi(1.0), SubcriticalInput);
}

TEST_CASE("coupled jump rates sum to the infinite branching rate") {
  const LaplaceExponent p = with_jumps();
  double sum = 0.0;
  for (int k = 0; k < 200; ++k) sum += p.coupled_jump_rate(k);
  // sum_k b^k y^{k+1}/(k+1)! e^{-by} = (1 - e^{-by}) / b
  CHECK(sum == doctest::Approx(p.immigration_jump_rate()).epsilon(1e-10));
  LevyQuartet atom;
  atom.alpha = -1.0 - std::exp(-1.0);
  atom.beta = 1.0;
  atom.atoms = {{1.0, 1.0}};
  const LaplaceExponent a(atom);
  CHECK(a.b() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(a.coupled_jump_rate(1) == doctest::Approx(std::exp(-1.0) / 2.0).epsilon(1e-10));
}

TEST_CASE("semigroup u") {
  const auto sq = [](double u) { return u * u; };
  CHECK(std::abs(semigroup_u(sq, 1.0, 1.0) - 0.5) <= 1e-8);
  CHECK(semigroup_u(sq, 3.0, 0.0) == 3.0);
  CHECK(std::abs(semigroup_u([](double u) { return u; }, 2.0, std::log(2.0)) - 1.0) <= 1e-8);
  const LaplaceExponent p = with_jumps();
  const auto f = [&p](double l) { return p(l); };
  for (double l : {0.2, 1.0, 4.0})
    for (double s : {0.1, 0.7})
      for (double t : {0.3, 1.2}) {
        const double a = semigroup_u(f, l, s + t);
        const double b = semigroup_u(f, semigroup_u(f, l, t), s);
        CHECK(std::abs(a - b) <= 1e-6);
      }
  double prev = 0.0;
  for (double l = 0.1; l < 10.0; l += 0.3) {
    const double u = semigroup_u(f, l, 1.0);
    CHECK(u > prev);
    prev = u;
  }
}

TEST_CASE("Grey's condition") {
  CHECK(greys_condition_check(quadratic()).satisfied);
  CHECK(greys_condition_check(quadratic()).numerically_converged);
  CHECK_FALSE(greys_condition_check(yule(0.5)).satisfied);
  LevyQuartet fv;
  fv.alpha = 1.0;
  fv.atoms = {{2.0, 0.5}};
  CHECK_FALSE(greys_condition_check(LaplaceExponent(fv)).satisfied);
}

TEST_CASE("validation rejects malformed quartets") {
  LevyQuartet q;
  q.beta = -1.0;
  CHECK_THROWS_AS(LaplaceExponent{q}, InvalidExponent);
  LevyQuartet a;
  a.atoms = {{1.0, -0.5}};
  CHECK_THROWS_AS(LaplaceExponent{a}, InvalidExponent);
  LevyQuartet k;
  k.kappa = -0.1;
  CHECK_THROWS_AS(LaplaceExponent{k}, InvalidExponent);
}

TEST_CASE("exponent files in TOML and JSON parse identically") {
  const std::string toml =
      "kappa = 0.0\nalpha = -0.5\nbeta = 0.7\natoms = [[1.0, 1.0], [0.5, 0.3]]\n"
      "exp_component = { mass = 0.8, rate = 2.0 }\n";
  const std::string json =
      R"({"kappa": 0, "alpha": -0.5, "beta": 0.7, "atoms": [[1.0, 1.0], [0.5, 0.3]],)"
      R"( "exp_component": {"mass": 0.8, "rate": 2.0}})";
  const LaplaceExponent a = parse_exponent(toml, false), b = parse_exponent(json, true);
  for (double l : {0.0, 0.3, 2.0, 11.0}) {
    CHECK(a(l) == b(l));
    CHECK(a(l) == doctest::Approx(with_jumps()(l)).epsilon(1e-15));
  }
  CHECK(a.to_json() == b.to_json());
  CHECK_THROWS_AS(parse_exponent("alpha = ", false), InvalidExponent);
  CHECK_THROWS_AS(parse_exponent(R"({"alpha": 1, "gamma": 2})", true), InvalidExponent);
}
