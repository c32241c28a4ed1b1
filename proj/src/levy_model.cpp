#include "ltree/levy_model.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>
#include <toml.hpp>

#include "ltree/errors.hpp"

namespace ltree {

namespace {

// int_0^1 x rho e^{-rho x} dx
double exp_small_mean(double rho) {
  return (1.0 - std::exp(-rho) * (1.0 + rho)) / rho;
}

// int_0^1 x e^{-mu x} dx
double exp_small_moment(double mu) {
  return (1.0 - std::exp(-mu) * (1.0 + mu)) / (mu * mu);
}

}  // namespace

void LevyQuartet::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(kappa) || !finite(alpha) || !finite(beta))
    throw InvalidExponent("non-finite coefficient");
  if (kappa < 0.0) throw InvalidExponent("kappa must be >= 0");
  if (beta < 0.0) throw InvalidExponent("beta must be >= 0");
  for (const auto& a : atoms) {
    if (!(a.mass > 0.0) || !(a.size > 0.0) || !finite(a.mass) || !finite(a.size))
      throw InvalidExponent("atom mass and size must be > 0");
  }
  if (exp_component) {
    if (!(exp_component->mass >= 0.0) || !(exp_component->rate > 0.0))
      throw InvalidExponent("exp_component needs mass >= 0 and rate > 0");
  }
}

double LevyQuartet::jump_mass() const {
  double m = 0.0;
  for (const auto& a : atoms) m += a.mass;
  if (exp_component) m += exp_component->mass;
  return m;
}

LaplaceExponent::LaplaceExponent(LevyQuartet q) : q_(std::move(q)) {
  q_.validate();
  jump_mass_ = q_.jump_mass();
  small_jump_mean_ = 0.0;
  for (const auto& a : q_.atoms)
    if (a.size <= 1.0) small_jump_mean_ += a.mass * a.size;
  if (q_.exp_component)
    small_jump_mean_ += q_.exp_component->mass * exp_small_mean(q_.exp_component->rate);
  const bool null_process = drift() == 0.0 && jump_mass_ == 0.0 && q_.kappa == 0.0;
  if (q_.beta == 0.0 && drift() >= 0.0 && !null_process)
    throw InvalidExponent("psi does not tend to infinity (subordinator)");
  b_ = largest_root([this](double l) { return psi(l); });
}

double LaplaceExponent::psi(double lambda) const {
  double v = -q_.kappa + q_.alpha * lambda + q_.beta * lambda * lambda;
  for (const auto& a : q_.atoms) {
    double comp = a.size <= 1.0 ? lambda * a.size : 0.0;
    v += a.mass * (std::expm1(-lambda * a.size) + comp);
  }
  if (q_.exp_component) {
    const double c = q_.exp_component->mass, rho = q_.exp_component->rate;
    v += -c * lambda / (rho + lambda) + lambda * c * exp_small_mean(rho);
  }
  return v;
}

double LaplaceExponent::derivative(double lambda) const {
  double v = q_.alpha + 2.0 * q_.beta * lambda;
  for (const auto& a : q_.atoms) {
    double comp = a.size <= 1.0 ? a.size : 0.0;
    v += a.mass * (-a.size * std::exp(-lambda * a.size) + comp);
  }
  if (q_.exp_component) {
    const double c = q_.exp_component->mass, rho = q_.exp_component->rate;
    v += -c * rho / ((rho + lambda) * (rho + lambda)) + c * exp_small_mean(rho);
  }
  return v;
}

LaplaceExponent LaplaceExponent::sharp() const {
  const double b = b_;
  LevyQuartet s;
  s.kappa = 0.0;
  s.beta = q_.beta;
  double a = q_.alpha + 2.0 * q_.beta * b;
  for (const auto& at : q_.atoms) {
    if (at.size <= 1.0) a += at.mass * at.size * (-std::expm1(-b * at.size));
    s.atoms.push_back({at.mass * std::exp(-b * at.size), at.size});
  }
  if (q_.exp_component) {
    const double c = q_.exp_component->mass, rho = q_.exp_component->rate;
    a += c * rho * (exp_small_moment(rho) - exp_small_moment(rho + b));
    s.exp_component = ExpComponent{c * rho / (rho + b), rho + b};
  }
  s.alpha = a;
  return LaplaceExponent(s);
}

double LaplaceExponent::phi(double lambda) const {
  if (b_ <= 0.0) throw SubcriticalInput("phi needs b > 0");
  return (psi(lambda + b_) - psi(lambda)) / b_;
}

double LaplaceExponent::phi_integral_form(double lambda) const {
  if (b_ <= 0.0) throw SubcriticalInput("phi needs b > 0");
  const double b = b_;
  double v = 2.0 * q_.beta * lambda;
  for (const auto& a : q_.atoms)
    v += a.mass * (-std::expm1(-lambda * a.size)) * (-std::expm1(-b * a.size)) / b;
  if (q_.exp_component) {
    // int (1-e^{-lx})(1-e^{-bx}) rho e^{-rho x} dx = 1 - r/(r+l) - r/(r+b) + r/(r+l+b)
    const double c = q_.exp_component->mass, r = q_.exp_component->rate;
    v += c / b * (1.0 - r / (r + lambda) - r / (r + b) + r / (r + lambda + b));
  }
  return v;
}

double LaplaceExponent::phi_form_gap() const {
  if (b_ <= 0.0) throw SubcriticalInput("phi needs b > 0");
  return q_.kappa / b_;
}

double LaplaceExponent::drift() const { return -q_.alpha - small_jump_mean_; }

double LaplaceExponent::sample_jump(Rng& rng) const {
  double u = rng.uniform() * jump_mass_;
  for (const auto& a : q_.atoms) {
    if (u < a.mass) return a.size;
    u -= a.mass;
  }
  if (q_.exp_component) return rng.exponential(q_.exp_component->rate);
  return q_.atoms.back().size;
}

double LaplaceExponent::immigration_jump_rate() const {
  if (b_ <= 0.0) throw SubcriticalInput("immigration needs b > 0");
  double v = 0.0;
  for (const auto& a : q_.atoms) v += a.mass * (-std::expm1(-b_ * a.size)) / b_;
  if (q_.exp_component) v += q_.exp_component->mass / (b_ + q_.exp_component->rate);
  return v;
}

double LaplaceExponent::sample_immigration_jump(Rng& rng) const {
  const double total = immigration_jump_rate();
  double u = rng.uniform() * total;
  for (const auto& a : q_.atoms) {
    double w = a.mass * (-std::expm1(-b_ * a.size)) / b_;
    if (u < w) return a.size;
    u -= w;
  }
  if (q_.exp_component) {
    for (;;) {
      double y = rng.exponential(q_.exp_component->rate);
      if (rng.uniform() < -std::expm1(-b_ * y)) return y;
    }
  }
  return q_.atoms.back().size;
}

double LaplaceExponent::coupled_jump_rate(int k) const {
  if (b_ <= 0.0) throw SubcriticalInput("coupled jump rates need b > 0");
  if (k < 0) return 0.0;
  double s = 0.0;
  const double lf = std::lgamma(static_cast<double>(k) + 2.0);
  for (const auto& a : q_.atoms)
    s += a.mass * std::exp(k * std::log(b_) + (k + 1) * std::log(a.size) - lf - b_ * a.size);
  if (q_.exp_component && q_.exp_component->mass > 0.0) {
    const double c = q_.exp_component->mass, rho = q_.exp_component->rate;
    s += c * rho * std::exp(k * std::log(b_) - (k + 2) * std::log(b_ + rho));
  }
  return s;
}

nlohmann::json LaplaceExponent::to_json() const {
  nlohmann::json j;
  j["kappa"] = q_.kappa;
  j["alpha"] = q_.alpha;
  j["beta"] = q_.beta;
  j["atoms"] = nlohmann::json::array();
  for (const auto& a : q_.atoms) j["atoms"].push_back({a.mass, a.size});
  if (q_.exp_component)
    j["exp_component"] = {{"mass", q_.exp_component->mass}, {"rate", q_.exp_component->rate}};
  return j;
}

double largest_root(const std::function<double(double)>& psi) {
  constexpr int kBudget = 400;
  constexpr double kTol = 1e-12;
  const double f0 = psi(0.0);
  double lo = 0.0, hi = 0.0;
  if (f0 < 0.0) {
    lo = 0.0;
    hi = 1.0;
  } else {
    const double delta = 1e-7;
    const double slope = (psi(delta) - f0) / delta;
    if (slope >= 0.0) return 0.0;
    lo = delta;
    hi = 2.0 * delta;
  }
  int it = 0;
  while (psi(hi) <= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++it > kBudget || !std::isfinite(hi)) throw NonConvergence("no sign change while bracketing");
  }
  for (it = 0; hi - lo > kTol && it < kBudget; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (psi(mid) > 0.0)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

double semigroup_u(const std::function<double(double)>& psi, double lambda, double t, double rel_tol) {
  if (t == 0.0) return lambda;
  using State = std::array<double, 1>;
  namespace odeint = boost::numeric::odeint;
  State x{lambda};
  auto rhs = [&psi](const State& u, State& du, double) { du[0] = -psi(u[0]); };
  auto stepper = odeint::make_controlled(rel_tol * 1e-3, rel_tol, odeint::runge_kutta_dopri5<State>());
  try {
    odeint::integrate_adaptive(stepper, rhs, x, 0.0, t, std::min(t, 1e-3));
  } catch (const std::exception& e) {
    throw StepUnderflow(e.what());
  }
  if (!std::isfinite(x[0])) throw StepUnderflow("non-finite solution");
  return x[0];
}

GreyCheck greys_condition_check(const LaplaceExponent& psi, int blocks) {
  GreyCheck g;
  g.satisfied = psi.beta() > 0.0;
  g.lower = 1.0 + 2.0 * psi.b();
  double a = g.lower;
  for (int k = 0; k < blocks; ++k) {
    auto f = [&psi](double q) { return 1.0 / psi(q); };
    g.block_integrals.push_back(boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, 2.0 * a));
    a *= 2.0;
  }
  const auto& v = g.block_integrals;
  g.numerically_converged = v.size() >= 2 && v.back() / v[v.size() - 2] < 0.75;
  return g;
}

LevyQuartet quartet_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidExponent("exponent must be a table");
  LevyQuartet q;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    if (k == "kappa")
      q.kappa = it->get<double>();
    else if (k == "alpha")
      q.alpha = it->get<double>();
    else if (k == "beta")
      q.beta = it->get<double>();
    else if (k == "atoms") {
      for (const auto& a : *it) {
        if (!a.is_array() || a.size() != 2) throw InvalidExponent("atoms entries are [mass, size]");
        q.atoms.push_back({a[0].get<double>(), a[1].get<double>()});
      }
    } else if (k == "exp_component") {
      ExpComponent e;
      for (auto e_it = it->begin(); e_it != it->end(); ++e_it) {
        if (e_it.key() == "mass")
          e.mass = e_it->get<double>();
        else if (e_it.key() == "rate")
          e.rate = e_it->get<double>();
        else
          throw InvalidExponent("unknown exp_component key '" + e_it.key() + "'");
      }
      q.exp_component = e;
    } else {
      throw InvalidExponent("unknown key '" + k + "'");
    }
  }
  q.validate();
  return q;
}

namespace {

nlohmann::json toml_to_json(const toml::node& n) {
  if (auto t = n.as_table()) {
    nlohmann::json j = nlohmann::json::object();
    for (auto&& [k, v] : *t) j[std::string(k.str())] = toml_to_json(v);
    return j;
  }
  if (auto a = n.as_array()) {
    nlohmann::json j = nlohmann::json::array();
    for (auto&& v : *a) j.push_back(toml_to_json(v));
    return j;
  }
  if (auto v = n.value_exact<std::int64_t>()) return *v;
  if (auto v = n.value<double>()) return *v;
  if (auto s = n.value<std::string>()) return *s;
  if (auto b = n.value<bool>()) return *b;
  throw InvalidExponent("unsupported TOML value");
}

}  // namespace

nlohmann::json parse_structured_text(const std::string& text, bool is_json) {
  if (is_json) return nlohmann::json::parse(text);
  return toml_to_json(toml::parse(text));
}

LaplaceExponent parse_exponent(const std::string& text, bool is_json) {
  nlohmann::json j;
  try {
    j = parse_structured_text(text, is_json);
  } catch (const InvalidExponent&) {
    throw;
  } catch (const std::exception& e) {
    throw InvalidExponent(std::string("parse error: ") + e.what());
  }
  return LaplaceExponent(quartet_from_json(j));
}

LaplaceExponent load_exponent(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidExponent("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const bool is_json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
  return parse_exponent(ss.str(), is_json);
}

}  // namespace ltree
