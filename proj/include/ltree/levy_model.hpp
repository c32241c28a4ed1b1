#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ltree/rng.hpp"

namespace ltree {

struct Atom {
  double mass = 0.0;
  double size = 0.0;
};

// pi_exp(dx) = mass * rate * exp(-rate x) dx
struct ExpComponent {
  double mass = 0.0;
  double rate = 1.0;
};

// (kappa, alpha, beta, pi) with pi = finitely many atoms plus an optional
// exponential density. The process has drift -alpha.
struct LevyQuartet {
  double kappa = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<Atom> atoms;
  std::optional<ExpComponent> exp_component;

  void validate() const;
  double jump_mass() const;
};

class LaplaceExponent {
 public:
  explicit LaplaceExponent(LevyQuartet q);

  const LevyQuartet& quartet() const { return q_; }
  double kappa() const { return q_.kappa; }
  double alpha() const { return q_.alpha; }
  double beta() const { return q_.beta; }

  double psi(double lambda) const;
  double operator()(double lambda) const { return psi(lambda); }
  double derivative(double lambda) const;

  double b() const { return b_; }
  bool is_supercritical() const { return b_ > 0.0; }
  bool is_null() const { return q_.beta == 0.0 && drift() == 0.0 && jump_mass_ == 0.0 && q_.kappa == 0.0; }

  double psi_sharp(double lambda) const { return psi(lambda + b_); }
  // The exponent Psi(. + b) written as a quartet of the same family.
  LaplaceExponent sharp() const;

  // (Psi(lambda+b) - Psi(lambda)) / b
  double phi(double lambda) const;
  // 2 beta lambda + int (1-e^{-lambda x})(1-e^{-bx})/b pi(dx)
  double phi_integral_form(double lambda) const;
  // Difference of the two forms above; equals kappa / b.
  double phi_form_gap() const;

  // Slope of the process between jumps: -alpha - int_{x<=1} x pi(dx).
  double drift() const;
  double jump_rate() const { return jump_mass_; }
  double sample_jump(Rng& rng) const;

  // Total rate of jumps of size x weighted by (1-e^{-bx})/b.
  double immigration_jump_rate() const;
  // Jump size y drawn with density proportional to (1-e^{-by}) pi(dy).
  double sample_immigration_jump(Rng& rng) const;
  // int b^k y^{k+1}/(k+1)! e^{-by} pi(dy), k >= 0.
  double coupled_jump_rate(int k) const;

  nlohmann::json to_json() const;

 private:
  LevyQuartet q_;
  double jump_mass_ = 0.0;
  double small_jump_mean_ = 0.0;
  double b_ = 0.0;
};

// Largest root of a convex exponent with psi -> infinity. Returns 0 for
// (sub)critical inputs.
double largest_root(const std::function<double(double)>& psi);

// u_t(lambda): solution of du/ds = -psi(u), u_0 = lambda.
double semigroup_u(const std::function<double(double)>& psi, double lambda, double t,
                   double rel_tol = 1e-9);

struct GreyCheck {
  bool satisfied = false;           // exact criterion: beta > 0
  bool numerically_converged = false;
  double lower = 0.0;               // Lambda
  std::vector<double> block_integrals;  // int over [Lambda 2^k, Lambda 2^{k+1}]
};
GreyCheck greys_condition_check(const LaplaceExponent& psi, int blocks = 40);

LevyQuartet quartet_from_json(const nlohmann::json& j);
// TOML or JSON text as a JSON value (TOML integers stay integers).
nlohmann::json parse_structured_text(const std::string& text, bool is_json);
// Reads TOML unless the file name ends in .json.
LaplaceExponent load_exponent(const std::string& path);
LaplaceExponent parse_exponent(const std::string& text, bool is_json);

}  // namespace ltree
