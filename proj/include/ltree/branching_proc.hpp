#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "ltree/levy_model.hpp"
#include "ltree/rng.hpp"

namespace ltree {

struct TwoTypeState {
  long n = 0;
  double z = 0.0;
};

enum class BranchTerminal { horizon, absorbed, exploded, budget, stopped };
std::string to_string(BranchTerminal k);

// Piecewise record of a branching process; (times[i], n[i], z[i]) is the
// state from times[i] on. For one-type processes n stays 0.
struct BranchingPath {
  std::vector<double> times;
  std::vector<long> n;
  std::vector<double> z;
  // int_0^{times[i]} Z ds (the Lamperti clock; Z2 for two-type paths).
  std::vector<double> theta;
  BranchTerminal terminal = BranchTerminal::horizon;

  void push(double t, long ni, double zi, double th);
  bool empty() const { return times.empty(); }
  TwoTypeState final_state() const;
  TwoTypeState at(double t) const;
  void write_csv(std::ostream& os) const;
};

struct CbOptions {
  // Target real-time resolution: Gaussian steps are h * Z long in the
  // Lamperti clock.
  double h = 1e-3;
  std::size_t budget = 50'000'000;
  // Keep every step; otherwise only the start and the end state.
  bool record = true;
  // Times in (0, T) at which the state is always recorded.
  std::vector<double> checkpoints;
  // Two-type runs stop right after this many Z1 jumps (0: never).
  std::size_t stop_after_z1_jumps = 0;
};

// CB(psi) from x0 on [0, T] via Z_t = x0 + X(int_0^t Z).
BranchingPath simulate_cb(const LaplaceExponent& psi, double x0, double T, const CbOptions& opt, Rng& rng);

// Immigration subordinator: drift plus compound Poisson jumps.
struct Immigration {
  double drift = 0.0;
  double jump_rate = 0.0;
  const LaplaceExponent* source = nullptr;  // jump sizes ~ (1 - e^{-bx}) pi(dx)

  // n Phi for the exponent psi: drift 2 beta n, jumps at rate n R_pi.
  static Immigration of(const LaplaceExponent& psi, double n = 1.0);
  static Immigration none() { return {}; }
};

BranchingPath simulate_cbi(const LaplaceExponent& sharp, const Immigration& phi, double x0, double T,
                           const CbOptions& opt, Rng& rng);

// Per-line event rates of the two-type process.
struct TwoTypeRates {
  double binary = 0.0;    // beta b
  double jump = 0.0;      // int (1 - e^{-by})/b pi(dy)
  double total() const { return binary + jump; }
};
TwoTypeRates twotype_rates(const LaplaceExponent& psi);

// Per-line rate of Z1 jumps of size exactly k >= 1.
double twotype_jump_rate(const LaplaceExponent& psi, int k);

// (Z1, Z2): each prolific line carries binary events (Z1 += 1) and pi-events
// (y ~ (1 - e^{-by}) pi, j ~ Poisson(by) given j >= 1, Z1 += j - 1, Z2 += y);
// between events Z2 is CB(Psi#) with immigration 2 beta Z1.
BranchingPath simulate_twotype(const LaplaceExponent& psi, TwoTypeState start, double T,
                               const CbOptions& opt, Rng& rng);

// d/dt E_{(n,z)}[s^{Z1} e^{-lambda Z2}] at t = 0, closed form.
double twotype_generator(const LaplaceExponent& psi, TwoTypeState st, double s, double lambda);

// exp(-z (u_t(lambda+b) - b)) ((u_t(lambda+b) - u_t(lambda+b(1-s))) / b)^n
double twotype_semigroup(const LaplaceExponent& psi, TwoTypeState st, double s, double lambda, double t);

// Derivative of twotype_semigroup at t = 0 by Richardson extrapolation.
double twotype_generator_from_semigroup(const LaplaceExponent& psi, TwoTypeState st, double s,
                                        double lambda, double t = 1e-4);

// Mean of CBI(sharp, phi) at T from x0: the linear ODE
// m' = -sharp'(0) m + drift + jump_rate * E[jump].
double cbi_mean(const LaplaceExponent& sharp, double drift, double jump_mean_rate, double x0, double T);

}  // namespace ltree
