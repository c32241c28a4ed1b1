#include "ltree/genealogy.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "ltree/errors.hpp"

namespace ltree {

namespace {

// Leb{s in [a, b) : the affine segment from va to vb is <= theta}.
double measure_below(double a, double b, double va, double vb, double theta) {
  const double len = b - a;
  if (len <= 0.0) return 0.0;
  if (va <= theta && vb <= theta) return len;
  if (va > theta && vb > theta) return 0.0;
  if (va < vb) return len * (theta - va) / (vb - va);
  return len * (theta - vb) / (va - vb);
}

}  // namespace

double occupation_ratio(const CadlagPath& f, double t, double eps) {
  if (f.knots.empty() || t <= 0.0) return 0.0;
  t = std::min(t, f.lifetime());
  const auto& k = f.knots;
  std::size_t i = f.segment(t);
  if (k.size() >= 2 && t >= k[i + 1].t) i = i + 1;
  double M = std::min(f.value(t), f.left_limit(t));
  double total = 0.0;
  if (t > k[i].t) {
    const double vb = f.left_limit(t);
    total += measure_below(k[i].t, t, k[i].value, vb, std::min(M, vb) + eps);
    M = std::min({M, k[i].value, vb});
  }
  M = std::min(M, k[i].value);
  for (std::size_t j = i; j-- > 0;) {
    const double vb = k[j + 1].left;
    total += measure_below(k[j].t, k[j + 1].t, k[j].value, vb, std::min(M, vb) + eps);
    M = std::min({M, k[j].value, vb});
  }
  return total / eps;
}

HeightEstimate height_estimate(const CadlagPath& f, const std::vector<double>& times,
                               const std::vector<double>& epsilons, double beta, double h) {
  if (!(beta > 0.0)) throw NonGrey("the occupation estimator needs beta > 0");
  if (epsilons.empty()) throw EpsilonBelowResolution("empty epsilon ladder");
  const double floor = 3.0 * std::sqrt(2.0 * beta * h);
  for (std::size_t k = 0; k < epsilons.size(); ++k) {
    if (epsilons[k] < floor) throw EpsilonBelowResolution("epsilon below 3 sqrt(2 beta h)");
    if (k > 0 && !(epsilons[k] < epsilons[k - 1]))
      throw EpsilonBelowResolution("epsilon ladder must decrease");
  }
  HeightEstimate out;
  out.times = times;
  out.epsilons = epsilons;
  out.ladder.assign(epsilons.size(), std::vector<double>(times.size(), 0.0));
  for (std::size_t k = 0; k < epsilons.size(); ++k)
    for (std::size_t i = 0; i < times.size(); ++i)
      out.ladder[k][i] = occupation_ratio(f, times[i], epsilons[k]);
  out.values = out.ladder.back();
  out.upward.resize(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto it = std::lower_bound(f.knots.begin(), f.knots.end(), times[i],
                                     [](const Knot& kn, double v) { return kn.t < v; });
    out.upward[i] = it != f.knots.end() && it->t == times[i] && it->value != it->left;
  }
  return out;
}

CadlagPath continuous_height(const CadlagPath& f, double beta) {
  if (!(beta > 0.0)) throw NonGrey("height of a continuous contour needs beta > 0");
  CadlagPath out;
  out.terminal = f.terminal;
  out.tips = f.tips;
  if (f.knots.empty()) return out;
  const auto& k = f.knots;
  double I = k[0].value;
  out.push(k[0].t, 0.0);
  for (std::size_t i = 0; i + 1 < k.size(); ++i) {
    const double v = k[i].value, l = k[i + 1].left;
    if (l >= I) {
      out.push(k[i + 1].t, (l - I) / beta);
    } else {
      const double tc = k[i].t + (k[i + 1].t - k[i].t) * (v - I) / (v - l);
      out.push(tc, 0.0);
      out.push(k[i + 1].t, 0.0);
      I = l;
    }
    if (k[i + 1].value != l) out.jump_to((k[i + 1].value - I) / beta);
  }
  return out;
}

Generations discrete_generations(const CadlagPath& contour) {
  Generations g;
  if (contour.knots.empty()) return g;
  const auto& k = contour.knots;
  for (std::size_t i = 1; i < k.size(); ++i)
    if (k[i].left > k[i - 1].value + 1e-9)
      throw NotFiniteVariation("contour rises between jumps");
  std::vector<double> births{-1.0};
  g.sizes.push_back(1);
  g.of_individual.push_back(0);
  auto visit = [&](const Knot& kn) {
    if (kn.value <= kn.left) return;
    while (births.size() > 1 && births.back() >= kn.left - 1e-12) births.pop_back();
    births.push_back(kn.left);
    const std::size_t gen = births.size() - 1;
    if (g.sizes.size() <= gen) g.sizes.resize(gen + 1, 0);
    ++g.sizes[gen];
    g.of_individual.push_back(gen);
  };
  for (const auto& kn : k) visit(kn);
  return g;
}

Generations discrete_generations(const ChronologicalTree& t) {
  Generations g;
  g.sizes = t.generation_sizes();
  for (int u : t.contour_order()) g.of_individual.push_back(static_cast<std::size_t>(t.generation(u)));
  return g;
}

double occupation(const CadlagPath& f, double lo, double hi) {
  double total = 0.0;
  const auto& k = f.knots;
  for (std::size_t i = 0; i + 1 < k.size(); ++i) {
    const double u = k[i].value, v = k[i + 1].left, dt = k[i + 1].t - k[i].t;
    if (u == v) {
      if (u >= lo && u < hi) total += dt;
      continue;
    }
    const double a = std::min(u, v), b = std::max(u, v);
    const double overlap = std::max(0.0, std::min(b, hi) - std::max(a, lo));
    total += dt * overlap / (b - a);
  }
  return total;
}

std::vector<double> occupation_histogram(const CadlagPath& f, double lo, double w, std::size_t n) {
  std::vector<double> out(n, 0.0);
  const auto& k = f.knots;
  const auto bin_of = [&](double v) { return static_cast<long>(std::floor((v - lo) / w)); };
  for (std::size_t i = 0; i + 1 < k.size(); ++i) {
    const double u = k[i].value, v = k[i + 1].left, dt = k[i + 1].t - k[i].t;
    if (u == v) {
      const long j = bin_of(u);
      if (j >= 0 && j < static_cast<long>(n)) out[static_cast<std::size_t>(j)] += dt;
      continue;
    }
    const double a = std::min(u, v), b = std::max(u, v);
    const long j0 = std::max(0L, bin_of(a));
    const long j1 = std::min(static_cast<long>(n) - 1, bin_of(b));
    for (long j = j0; j <= j1; ++j) {
      const double blo = lo + static_cast<double>(j) * w, bhi = blo + w;
      const double overlap = std::max(0.0, std::min(b, bhi) - std::max(a, blo));
      out[static_cast<std::size_t>(j)] += dt * overlap / (b - a);
    }
  }
  return out;
}

void LevelProfile::write_csv(std::ostream& os) const {
  os.precision(17);
  os << "a,z1,z2\n";
  for (std::size_t i = 0; i < a.size(); ++i) os << a[i] << ',' << z1[i] << ',' << z2[i] << '\n';
}

LevelProfile level_profile(const CadlagPath& height, const std::vector<const ChronologicalTree*>& lines,
                           const std::vector<double>& levels, double bin, double truncation) {
  if (!(bin > 0.0)) throw OutOfDomain("bin width must be > 0");
  LevelProfile p;
  p.bin = bin;
  for (double a : levels) {
    if (a < 0.0 || a + bin > truncation + 1e-12)
      throw GridExceedsTruncation("level grid must stay below the truncation height");
    long n = 0;
    for (const auto* t : lines) {
      if (t == nullptr) continue;
      for (const auto& v : t->nodes())
        if (v.prolific && v.birth <= a && a < v.death()) ++n;
    }
    p.a.push_back(a);
    p.z1.push_back(n);
    p.z2.push_back(occupation(height, a, a + bin) / bin);
  }
  return p;
}

long Genealogy::prolific_at(double a) const {
  if (lines.empty()) return 0;
  return static_cast<long>(lines.alive_at(a));
}

nlohmann::json Genealogy::to_json() const {
  nlohmann::json nodes = nlohmann::json::array();
  if (!lines.empty()) {
    for (int i : lines.contour_order()) {
      const auto& n = lines.node(i);
      nlohmann::json j;
      j["label"] = lines.label(i);
      j["birth"] = n.birth;
      j["lifespan"] = n.lifespan;
      j["prolific"] = n.prolific;
      if (n.parent >= 0) j["branch_kind"] = to_string(n.kind);
      nodes.push_back(std::move(j));
    }
  }
  nlohmann::json compact_json = nlohmann::json::array();
  for (const auto& c : compact) compact_json.push_back({{"height", c.height}, {"local_time", c.local_time}});
  return {{"truncation", truncation},
          {"immigration_rate", immigration_rate},
          {"nodes", nodes},
          {"compact", compact_json}};
}

double sample_truncated_exponential(double b, double y, Rng& rng) {
  const double u = rng.uniform();
  if (b <= 0.0) return u * y;
  return -std::log1p(-u * (-std::expm1(-b * y))) / b;
}


GenealogySampler::GenealogySampler(LaplaceExponent psi, std::size_t node_budget)
    : psi_(std::move(psi)), budget_(node_budget) {
  if (!psi_.is_supercritical()) throw SubcriticalInput("genealogy sampler needs b > 0");
  if (!(psi_.beta() > 0.0)) throw NonGrey("genealogy sampler needs beta > 0");
  const auto& q = psi_.quartet();
  const double b = psi_.b();
  if (psi_.jump_rate() > 0.0) {
    // rate of k >= 1 through the (y, x, k) route: R_pi - int y e^{-by} pi(dy)
    double k0 = 0.0;
    for (const auto& a : q.atoms) k0 += a.mass * a.size * std::exp(-b * a.size);
    if (q.exp_component) {
      const double c = q.exp_component->mass, rho = q.exp_component->rate;
      k0 += c * rho / ((b + rho) * (b + rho));
    }
    const double route = psi_.immigration_jump_rate() - k0;
    double series = 0.0;
    for (int k = 1; k < 2000; ++k) {
      const double term = psi_.coupled_jump_rate(k);
      series += term;
      if (k > 5 && term < 1e-18 * std::max(1.0, series)) break;
    }
    series_gap_ = std::abs(series - route);
    if (series_gap_ > 1e-6) throw NonConvergence("branch-point rates disagree between the two routes");
  }
}

double GenealogySampler::rate_k(int k) const {
  if (k < 1) return 0.0;
  const double b = psi_.b();
  double r = psi_.coupled_jump_rate(k);
  if (k == 1) r += psi_.beta() * b;
  return r;
}

double GenealogySampler::total_branch_rate() const {
  const double b = psi_.b();
  double r = psi_.beta() * b;
  for (int k = 1; k < 2000; ++k) {
    const double term = psi_.coupled_jump_rate(k);
    r += term;
    if (k > 5 && term < 1e-18) break;
  }
  return r;
}

Genealogy GenealogySampler::sample(double A, Rng& rng) const {
  if (!(A > 0.0)) throw OutOfDomain("truncation must be > 0");
  const double b = psi_.b();
  const double binary = psi_.beta() * b;
  const double infinite = psi_.jump_rate() > 0.0 ? psi_.immigration_jump_rate() : 0.0;
  const double total = binary + infinite;
  Genealogy g;
  g.truncation = A;
  g.immigration_rate = 2.0 * psi_.beta();
  g.lines = ChronologicalTree(A, true);
  std::vector<int> pending{0};
  while (!pending.empty()) {
    const int line = pending.back();
    pending.pop_back();
    double t = g.lines.node(line).birth;
    for (;;) {
      t += rng.exponential(total);
      if (t >= A) break;
      if (rng.uniform() * total < binary) {
        if (g.lines.size() >= budget_) throw NodeBudgetExceeded("genealogy node budget exhausted");
        pending.push_back(g.lines.add_child(line, t, A - t, true, NodeKind::binary));
        continue;
      }
      const double y = psi_.sample_immigration_jump(rng);
      const double x = sample_truncated_exponential(b, y, rng);
      const long k = rng.poisson(b * (y - x));
      g.compact.push_back({t, x});
      std::vector<double> cuts(static_cast<std::size_t>(k));
      for (auto& c : cuts) c = (y - x) * rng.uniform();
      std::sort(cuts.begin(), cuts.end());
      double prev = 0.0;
      for (double c : cuts) {
        g.compact.push_back({t, c - prev});
        prev = c;
      }
      g.compact.push_back({t, (y - x) - prev});
      for (long i = 0; i < k; ++i) {
        if (g.lines.size() >= budget_) throw NodeBudgetExceeded("genealogy node budget exhausted");
        pending.push_back(g.lines.add_child(line, t, A - t, true, NodeKind::infinite));
      }
    }
  }
  return g;
}

}  // namespace ltree
