#include "ltree/splitting_sim.hpp"

#include <algorithm>
#include <functional>

#include "ltree/errors.hpp"

namespace ltree {

CadlagPath simulate_yule_contour(double b, double r, Rng& rng) {
  if (!(r > 0.0)) throw OutOfDomain("r must be > 0");
  CadlagPath f;
  f.terminal = TerminalKind::hit_zero;
  double t = 0.0;
  f.push(0.0, r);
  for (;;) {
    f.tips.push_back(t);
    const double s = b > 0.0 ? rng.exponential(b) : r + 1.0;
    if (s >= r) {
      f.push(t + r, 0.0);
      return f;
    }
    t += s;
    f.push(t, r - s);
    f.jump_to(r);
  }
}

SplittingModel::SplittingModel(LaplaceExponent psi, TreeOptions opt)
    : psi_(std::move(psi)), sharp_(psi_.sharp()), opt_(opt) {
  if (!psi_.is_supercritical()) throw SubcriticalInput("tree samplers need b > 0");
}

CadlagPath SplittingModel::post_minimum_stage(double r, Rng& rng) const {
  if (opt_.margin_route) {
    const double K = opt_.margin > 0.0 ? opt_.margin : default_margin(psi_);
    return simulate_post_minimum_below_margin(psi_, r, K, opt_.sim, rng);
  }
  return simulate_post_minimum_below(psi_, r, opt_.sim, rng);
}

CadlagPath SplittingModel::nu_r(double r, Rng& rng) const {
  std::vector<CadlagPath> parts;
  parts.push_back(post_minimum_stage(r, rng));
  for (std::size_t n = 0;; ++n) {
    if (n >= opt_.node_budget) throw NodeBudgetExceeded("too many copies in nu_r");
    CadlagPath c = simulate_below(psi_, r, r, opt_.sim, rng);
    const bool done = c.terminal == TerminalKind::hit_zero;
    if (!c.empty()) {
      c.tips = {0.0};
      parts.push_back(std::move(c));
    }
    if (done) break;
  }
  CadlagPath f = concatenate(parts);
  f.terminal = TerminalKind::hit_zero;
  return f;
}

CadlagPath SplittingModel::sin_tree(double r, Rng& rng) const {
  std::vector<CadlagPath> parts;
  parts.push_back(post_minimum_stage(r, rng));
  CadlagPath s2 = simulate_below(sharp_, r, r, opt_.sim, rng);
  s2.tips = {0.0};
  parts.push_back(std::move(s2));
  CadlagPath f = concatenate(parts);
  f.terminal = TerminalKind::hit_zero;
  return f;
}

void graft_lines(ChronologicalTree& dst, int at, const ChronologicalTree& src, double offset) {
  if (src.empty()) return;
  std::function<void(int, int)> copy = [&](int s, int d) {
    for (int c : src.node(s).children) {
      const auto& n = src.node(c);
      copy(c, dst.add_child(d, n.birth + offset, n.lifespan, n.prolific, n.kind));
    }
  };
  const auto& root = src.node(0);
  copy(0, dst.add_child(at, root.birth + offset, root.lifespan, root.prolific, root.kind));
}

namespace {

// Splices s + sub.contour into `stage` at its first passage below each s
// (heights decreasing) and returns the pieces in contour order.
std::vector<CadlagPath> splice_at_passages(CadlagPath stage, const std::vector<double>& heights,
                                           const std::vector<CadlagPath>& subs) {
  std::vector<CadlagPath> parts;
  for (std::size_t i = 0; i < heights.size(); ++i) {
    const double tau = first_passage_below(stage, heights[i]);
    if (tau < 0.0) throw MalformedPath("graft height never reached");
    auto [pre, post] = split_at(stage, tau);
    parts.push_back(std::move(pre));
    parts.push_back(shift_values(subs[i], heights[i]));
    stage = std::move(post);
  }
  parts.push_back(std::move(stage));
  return parts;
}

}  // namespace

UpsilonTree SplittingModel::upsilon_rec(double r, Rng& rng, std::size_t& nodes) const {
  if (++nodes > opt_.node_budget) throw NodeBudgetExceeded("Upsilon_tree node budget exhausted");
  UpsilonTree out;
  out.lines = ChronologicalTree(r, true);
  CadlagPath s1 = post_minimum_stage(r, rng);
  CadlagPath s2 = simulate_below(sharp_, r, r, opt_.sim, rng);
  s2.tips = {0.0};
  const long k = rng.poisson(b() * r);
  std::vector<double> heights(static_cast<std::size_t>(k));
  for (auto& s : heights) s = r * rng.uniform_pos();
  std::sort(heights.begin(), heights.end(), std::greater<>());
  std::vector<CadlagPath> subs;
  for (double s : heights) {
    UpsilonTree sub = upsilon_rec(r - s, rng, nodes);
    graft_lines(out.lines, 0, sub.lines, s);
    subs.push_back(std::move(sub.contour));
  }
  std::vector<CadlagPath> parts{std::move(s1)};
  for (auto& p : splice_at_passages(std::move(s2), heights, subs)) parts.push_back(std::move(p));
  out.contour = concatenate(parts);
  out.contour.terminal = TerminalKind::hit_zero;
  return out;
}

UpsilonTree SplittingModel::upsilon_tree(double r, Rng& rng) const {
  if (!(r > 0.0)) throw OutOfDomain("r must be > 0");
  std::size_t nodes = 0;
  return upsilon_rec(r, rng, nodes);
}

EtaForest SplittingModel::eta_x(double x, double A, Rng& rng) const {
  if (!(A > 0.0)) throw OutOfDomain("truncation must be > 0");
  EtaForest out;
  out.x = x;
  if (!(x > 0.0)) return out;
  CadlagPath compact = simulate_below_relative(sharp_, x, A, opt_.sim, rng);
  const long k = rng.poisson(b() * x);
  for (long i = 0; i < k; ++i) out.graft_heights.push_back(x * rng.uniform_pos());
  std::sort(out.graft_heights.begin(), out.graft_heights.end(), std::greater<>());
  std::vector<CadlagPath> subs;
  std::size_t nodes = 0;
  for (std::size_t i = 0; i < out.graft_heights.size(); ++i) {
    UpsilonTree sub = upsilon_rec(A, rng, nodes);
    out.prolific.push_back(std::move(sub.lines));
    subs.push_back(std::move(sub.contour));
  }
  out.contour = concatenate(splice_at_passages(std::move(compact), out.graft_heights, subs));
  out.contour.terminal = TerminalKind::hit_zero;
  return out;
}

}  // namespace ltree
