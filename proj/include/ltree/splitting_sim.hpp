#pragma once

#include <cstddef>
#include <vector>

#include "ltree/cadlag_path.hpp"
#include "ltree/levy_model.hpp"
#include "ltree/path_engine.hpp"
#include "ltree/rng.hpp"
#include "ltree/tree_core.hpp"

namespace ltree {

struct TreeOptions {
  SimOptions sim;
  std::size_t node_budget = 1'000'000;
  // Use simulate_levy with a margin K instead of the excursion coin for the
  // post-minimum stage (K <= 0 picks default_margin).
  bool margin_route = false;
  double margin = 0.0;
};

// Truncated Yule contour: slope -1 segments started at r, one per line alive
// at r. Tips sit at segment starts.
CadlagPath simulate_yule_contour(double b, double r, Rng& rng);

struct UpsilonTree {
  CadlagPath contour;
  // Lines reaching r, one node per line, all prolific.
  ChronologicalTree lines;
};

struct EtaForest {
  double x = 0.0;
  // Forest contour: a Psi# path from x with Upsilon_tree grafts spliced in.
  CadlagPath contour;
  // Spine heights of the prolific grafts, decreasing.
  std::vector<double> graft_heights;
  std::vector<ChronologicalTree> prolific;
};

// Samplers bound to one supercritical exponent.
class SplittingModel {
 public:
  explicit SplittingModel(LaplaceExponent psi, TreeOptions opt = {});

  const LaplaceExponent& psi() const { return psi_; }
  const LaplaceExponent& sharp() const { return sharp_; }
  const TreeOptions& options() const { return opt_; }
  double b() const { return psi_.b(); }

  CadlagPath post_minimum_stage(double r, Rng& rng) const;
  // Law Q^{->,r}: post-minimum stage then iid P_r copies below r until one
  // hits 0.
  CadlagPath nu_r(double r, Rng& rng) const;
  // Post-minimum stage then a Psi# path from r, both below r.
  CadlagPath sin_tree(double r, Rng& rng) const;
  UpsilonTree upsilon_tree(double r, Rng& rng) const;
  // Forest under eta_x truncated at height A above the running minimum.
  EtaForest eta_x(double x, double A, Rng& rng) const;

 private:
  UpsilonTree upsilon_rec(double r, Rng& rng, std::size_t& nodes) const;

  LaplaceExponent psi_;
  LaplaceExponent sharp_;
  TreeOptions opt_;
};

// Copies `src` (births shifted by `offset`) as children of node `at`.
void graft_lines(ChronologicalTree& dst, int at, const ChronologicalTree& src, double offset);

}  // namespace ltree
