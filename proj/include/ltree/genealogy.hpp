#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "ltree/cadlag_path.hpp"
#include "ltree/levy_model.hpp"
#include "ltree/rng.hpp"
#include "ltree/tree_core.hpp"

namespace ltree {

struct HeightEstimate {
  std::vector<double> times;
  std::vector<double> values;  // estimate at the last (smallest) epsilon
  std::vector<double> epsilons;
  // ladder[k][i]: estimate at times[i] with epsilons[k]
  std::vector<std::vector<double>> ladder;
  std::vector<bool> upward;  // times[i] is a jump time of the path
};

// (1/eps) Leb{s <= t : f(s) - inf_{[s,t]} f <= eps} on a decreasing epsilon
// ladder. Rejects beta = 0 and any epsilon below 3 sqrt(2 beta h).
HeightEstimate height_estimate(const CadlagPath& f, const std::vector<double>& times,
                               const std::vector<double>& epsilons, double beta, double h);

// Single evaluation of the occupation ratio above, O(#knots before t).
double occupation_ratio(const CadlagPath& f, double t, double eps);

// (f - running min) / beta: the height process of a contour without jumps.
CadlagPath continuous_height(const CadlagPath& f, double beta);

struct Generations {
  std::vector<std::size_t> sizes;
  // Generation of each individual in order of appearance on the contour.
  std::vector<std::size_t> of_individual;
};

// Counts ancestral jumps along a finite-variation contour.
Generations discrete_generations(const CadlagPath& contour);
Generations discrete_generations(const ChronologicalTree& t);

struct LevelProfile {
  double bin = 0.0;
  std::vector<double> a;
  std::vector<long> z1;
  std::vector<double> z2;

  void write_csv(std::ostream& os) const;
};

// Z1(a): prolific lines alive at a, summed over `lines`; Z2(a): time spent by
// the height path in [a, a + bin) divided by bin.
LevelProfile level_profile(const CadlagPath& height, const std::vector<const ChronologicalTree*>& lines,
                           const std::vector<double>& levels, double bin, double truncation);

// Leb{t : f(t) in [lo, hi)}.
double occupation(const CadlagPath& f, double lo, double hi);
// Occupation of every bin [lo + i w, lo + (i+1) w), i < n.
std::vector<double> occupation_histogram(const CadlagPath& f, double lo, double w, std::size_t n);

// A compact forest attached to the prolific part: its root local time and
// attachment height.
struct CompactGraft {
  double height = 0.0;
  double local_time = 0.0;
};

struct Genealogy {
  double truncation = 0.0;
  // Prolific lines; kind is binary or infinite for every non-root line.
  ChronologicalTree lines;
  std::vector<CompactGraft> compact;
  // Continuous immigration rate of compact mass per prolific line.
  double immigration_rate = 0.0;

  // Z1 at level a.
  long prolific_at(double a) const;
  nlohmann::json to_json() const;
};

// Poisson description of the locally compact genealogy truncated at A:
// binary prolific births at rate beta b per line, infinite branch points at
// rate int (1 - e^{-by})/b pi(dy) with y ~ (1 - e^{-by}) pi(dy), x with
// density prop. to e^{-bx} on [0, y] and k ~ Poisson(b (y - x)) new lines.
class GenealogySampler {
 public:
  explicit GenealogySampler(LaplaceExponent psi, std::size_t node_budget = 1'000'000);

  const LaplaceExponent& psi() const { return psi_; }
  // Per-line rate of branch points adding exactly k >= 1 lines.
  double rate_k(int k) const;
  // Total rate of binary and infinite branch points with k >= 1.
  double total_branch_rate() const;
  // Rate of infinite branch points with k >= 1 summed from the series,
  // compared at construction with the closed form.
  double series_gap() const { return series_gap_; }

  Genealogy sample(double A, Rng& rng) const;

 private:
  LaplaceExponent psi_;
  std::size_t budget_;
  double series_gap_ = 0.0;
};

// Draws x with density proportional to e^{-bx} on [0, y].
double sample_truncated_exponential(double b, double y, Rng& rng);

}  // namespace ltree
