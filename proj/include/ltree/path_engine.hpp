#pragma once

#include <cstddef>
#include <limits>

#include "ltree/cadlag_path.hpp"
#include "ltree/levy_model.hpp"
#include "ltree/rng.hpp"

namespace ltree {

struct StopRule {
  enum class Kind { horizon, hit_level, margin, killed_only };
  Kind kind = Kind::horizon;
  double horizon = 1.0;
  double level = 0.0;
  // Stop once X - running min >= margin.
  double margin = 0.0;

  static StopRule at_horizon(double T) { return {Kind::horizon, T, 0.0, 0.0}; }
  static StopRule hit(double y) { return {Kind::hit_level, 0.0, y, 0.0}; }
  static StopRule with_margin(double K) { return {Kind::margin, 0.0, 0.0, K}; }
  static StopRule killed() { return {Kind::killed_only, 0.0, 0.0, 0.0}; }
};

struct SimOptions {
  // Brownian mesh; pieces never exceed h when beta > 0.
  double h = 1e-3;
  // Maximal number of simulated pieces per path.
  std::size_t budget = 50'000'000;
};

// X under P_{x0}, stopped per the rule. With beta > 0 the Gaussian part is
// sampled exactly at piece ends and interpolated linearly in between.
CadlagPath simulate_levy(const LaplaceExponent& psi, double x0, const StopRule& stop,
                         const SimOptions& opt, Rng& rng);

// K with e^{-bK} = 1e-6.
double default_margin(const LaplaceExponent& psi);

// X under P_{x0} (0 <= x0 <= r) time-changed to remain below r, stopped on
// hitting 0 or on killing. Each excursion above r is replaced by a coin: it
// never comes back with probability 1 - e^{-b (v - r)}, v the value on
// entering it (terminal kind `escaped`); otherwise the path resumes at r.
CadlagPath simulate_below(const LaplaceExponent& psi, double x0, double r, const SimOptions& opt,
                          Rng& rng);

// X under P_{x0} with every excursion above its running minimum m
// time-changed to remain below m + r; stopped on hitting 0 or on killing.
CadlagPath simulate_below_relative(const LaplaceExponent& psi, double x0, double r,
                                   const SimOptions& opt, Rng& rng);

// The post-minimum process time-changed to remain below r, sampled with the
// same excursion coin. The recorded path restarts at every new minimum; it is
// final once an excursion above (minimum + r) never returns.
CadlagPath simulate_post_minimum_below(const LaplaceExponent& psi, double r,
                                       const SimOptions& opt, Rng& rng);

// Same law through simulate_levy with the margin rule, post_minimum and
// time_change_below.
CadlagPath simulate_post_minimum_below_margin(const LaplaceExponent& psi, double r, double K,
                                              const SimOptions& opt, Rng& rng);

}  // namespace ltree
