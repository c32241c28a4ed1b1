#include "experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ltree/branching_proc.hpp"
#include "ltree/errors.hpp"
#include "ltree/genealogy.hpp"
#include "ltree/levy_model.hpp"
#include "ltree/path_engine.hpp"
#include "ltree/splitting_sim.hpp"
#include "ltree/tree_core.hpp"

namespace ltree::detail {

namespace {

using json = nlohmann::json;
using stats::mean_se;

constexpr std::uint64_t kArm = std::uint64_t{1} << 32;

LaplaceExponent exponent_of(const json& j) { return LaplaceExponent(quartet_from_json(j)); }

json quadratic() { return {{"alpha", -1.0}, {"beta", 1.0}}; }

// beta = 1, one unit atom, b = 1.
json atom_exponent() {
  return {{"alpha", -1.0 - std::exp(-1.0)}, {"beta", 1.0}, {"atoms", json::array({json::array({1.0, 1.0})})}};
}

template <class T, class F>
std::vector<T> replicate(const ExperimentContext& ctx, std::size_t n, std::uint64_t arm, F f) {
  std::vector<T> out(n);
  parallel_for(n, ctx.jobs, [&](std::size_t i) {
    Rng rng(ctx.seed, arm * kArm + i);
    out[i] = f(rng);
  });
  return out;
}

template <class T>
std::string column_csv(const std::vector<std::string>& names, const std::vector<std::vector<T>>& cols) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t j = 0; j < names.size(); ++j) os << (j ? "," : "") << names[j];
  os << '\n';
  std::size_t rows = 0;
  for (const auto& c : cols) rows = std::max(rows, c.size());
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (j) os << ',';
      if (i < cols[j].size()) os << cols[j][i];
    }
    os << '\n';
  }
  return os.str();
}

std::vector<double> to_double(const std::vector<long>& v) { return {v.begin(), v.end()}; }

TreeOptions tree_options(const ExperimentContext& ctx) {
  TreeOptions o;
  o.sim.h = ctx.num("h");
  return o;
}

// Individuals live Exp(death) and give birth at rate `birth`; everything is
// cut at height r.
ChronologicalTree random_splitting_tree(double birth, double death, double r, std::size_t budget, Rng& rng) {
  ChronologicalTree t(std::min(rng.exponential(death), r));
  std::vector<int> todo{0};
  while (!todo.empty()) {
    const int u = todo.back();
    todo.pop_back();
    const double d0 = t.node(u).death();
    for (double s = t.node(u).birth + rng.exponential(birth); s < d0; s += rng.exponential(birth)) {
      if (t.size() >= budget) throw NodeBudgetExceeded("random tree exceeds the node budget");
      todo.push_back(t.add_child(u, s, std::min(rng.exponential(death), r - s)));
    }
  }
  return t;
}

// Generation of every individual by walking up to the root, listed in contour
// order, and the generation sizes.
Generations walk_generations(const ChronologicalTree& t) {
  Generations g;
  for (int u : t.contour_order()) {
    std::size_t k = 0;
    for (int v = u; t.node(v).parent >= 0; v = t.node(v).parent) ++k;
    g.of_individual.push_back(k);
    if (g.sizes.size() <= k) g.sizes.resize(k + 1, 0);
    ++g.sizes[k];
  }
  return g;
}

// Finite-variation exponent with slope -1, lifetimes Exp(rate) at total rate c.
LaplaceExponent splitting_exponent(double c, double rate) {
  LevyQuartet q;
  q.exp_component = ExpComponent{c, rate};
  // drift = -alpha - int_{x<=1} x pi(dx) = -1
  const double small = c * (1.0 - std::exp(-rate) * (1.0 + rate)) / rate;
  q.alpha = 1.0 - small;
  return LaplaceExponent(q);
}

// ---------------------------------------------------------------------------

void yule_geometric(ExperimentContext& ctx) {
  const double b = ctx.num("b"), r = ctx.num("r");
  const std::size_t n = ctx.count("n");
  ctx.n = n;
  const auto counts = replicate<long>(ctx, n, 0, [&](Rng& rng) {
    return static_cast<long>(simulate_yule_contour(b, r, rng).tips.size());
  });
  const double q = std::exp(-b * r);
  const auto pmf = [q](long k) { return q * std::pow(1.0 - q, static_cast<double>(k - 1)); };
  ctx.p_check("geometric_gof", stats::chi_square_gof(counts, pmf, 1), {{"success_probability", q}});
  const auto m = mean_se(to_double(counts));
  ctx.z_check("mean", m.mean, m.se, 1.0 / q);
  ctx.files.push_back({"yule-geometric.samples.csv", column_csv<long>({"n_r"}, {counts})});
}

struct ContourStats {
  double lifetime = 0.0;
  long tips = 0;
};

void grafting_equivalence(ExperimentContext& ctx) {
  const SplittingModel model(exponent_of(ctx.cfg.at("exponent")), tree_options(ctx));
  const double r = ctx.num("r");
  const std::size_t n = ctx.count("n");
  ctx.n = n;
  const auto nu = replicate<ContourStats>(ctx, n, 0, [&](Rng& rng) {
    const CadlagPath f = model.nu_r(r, rng);
    return ContourStats{f.lifetime(), static_cast<long>(f.tips.size())};
  });
  const auto up = replicate<ContourStats>(ctx, n, 1, [&](Rng& rng) {
    const UpsilonTree u = model.upsilon_tree(r, rng);
    return ContourStats{u.contour.lifetime(), static_cast<long>(u.contour.tips.size())};
  });
  std::vector<double> la, lb;
  std::vector<long> ta, tb;
  for (const auto& s : nu) la.push_back(s.lifetime), ta.push_back(s.tips);
  for (const auto& s : up) lb.push_back(s.lifetime), tb.push_back(s.tips);
  const auto ma = mean_se(la), mb = mean_se(lb);
  ctx.p_check("lifetime_ks", stats::ks_two_sample(la, lb),
              {{"mean_nu_r", ma.mean}, {"mean_upsilon", mb.mean}});
  const auto ca = mean_se(to_double(ta)), cb = mean_se(to_double(tb));
  ctx.p_check("crossings_chi_square", stats::chi_square_two_sample(ta, tb),
              {{"mean_nu_r", ca.mean}, {"mean_upsilon", cb.mean}, {"geometric_mean", std::exp(model.b() * r)}});
  ctx.files.push_back({"grafting-equivalence.samples.csv",
                       column_csv<double>({"lifetime_nu_r", "crossings_nu_r", "lifetime_upsilon", "crossings_upsilon"},
                                          {la, to_double(ta), lb, to_double(tb)})});
}

struct SpineSample {
  std::vector<double> births;
  bool agrees = false;
};

void spine_spacings(ExperimentContext& ctx) {
  const SplittingModel model(exponent_of(ctx.cfg.at("exponent")), tree_options(ctx));
  const double r = ctx.num("r"), b = model.b();
  const std::size_t n = ctx.count("n_trees");
  const auto trees = replicate<SpineSample>(ctx, n, 0, [&](Rng& rng) {
    const UpsilonTree u = model.upsilon_tree(r, rng);
    const ProlificSkeleton sk = skeleton_from_contour(u.contour);
    SpineSample s;
    for (int c : sk.lines.at(0).children) s.births.push_back(sk.lines[static_cast<std::size_t>(c)].alpha);
    std::sort(s.births.begin(), s.births.end());
    s.agrees = sk.approx_equal(prolific_skeleton(u.lines, r));
    return s;
  });
  // Randomized PIT: an observed spacing x maps to F(x); one censored at c maps
  // to a uniform point of (F(c), 1).
  Rng pit(ctx.seed, 7 * kArm);
  const auto F = [b](double x) { return -std::expm1(-b * x); };
  std::vector<double> u, observed;
  std::size_t censored = 0, mismatched = 0;
  for (const auto& t : trees) {
    double prev = 0.0;
    for (double a : t.births) {
      observed.push_back(a - prev);
      u.push_back(F(a - prev));
      prev = a;
    }
    const double fc = F(r - prev);
    u.push_back(fc + (1.0 - fc) * pit.uniform());
    ++censored;
    if (!t.agrees) ++mismatched;
  }
  ctx.n = u.size();
  ctx.p_check("spacings_ks", stats::ks_one_sample(u, [](double x) { return std::clamp(x, 0.0, 1.0); }),
              {{"observed", observed.size()}, {"censored", censored}, {"rate", b}});
  const std::size_t want = ctx.count("min_spacings");
  ctx.exact_check("enough_observed_spacings", observed.size() >= want ? 0 : 1, 1,
                  {{"observed", observed.size()}, {"required", want}});
  ctx.exact_check("contour_skeleton_matches_lines", mismatched, trees.size());
  ctx.files.push_back({"spine-spacings.samples.csv", column_csv<double>({"spacing"}, {observed})});
}

void skeleton_roundtrip(ExperimentContext& ctx) {
  const double birth = ctx.num("birth_rate"), death = ctx.num("death_rate"), r = ctx.num("r");
  const std::size_t n = ctx.count("n_trees"), budget = ctx.count("node_budget");
  ctx.n = n;
  struct Outcome {
    bool roundtrip = false, fallback = false;
    long lines = 0;
  };
  const auto out = replicate<Outcome>(ctx, n, 0, [&](Rng& rng) {
    ChronologicalTree t = truncate(random_splitting_tree(birth, death, r, budget, rng), r);
    tag_reaching(t, r);
    const ProlificSkeleton s1 = prolific_skeleton(t, r, true);
    const ProlificSkeleton s2 = prolific_skeleton(reconstruct(s1, r), r, true);
    const ProlificSkeleton s3 = prolific_skeleton(t, r, false);
    return Outcome{s1 == s2, s3 == s1, static_cast<long>(s1.size())};
  });
  std::size_t bad_rt = 0, bad_fb = 0, branching = 0;
  std::vector<long> lines;
  for (const auto& o : out) {
    bad_rt += !o.roundtrip;
    bad_fb += !o.fallback;
    branching += o.lines >= 2;
    lines.push_back(o.lines);
  }
  ctx.exact_check("extract_reconstruct_extract", bad_rt, n, {{"trees_with_branching_skeleton", branching}});
  ctx.exact_check("untagged_matches_tagged", bad_fb, n);
  ctx.files.push_back({"skeleton-roundtrip.samples.csv", column_csv<long>({"lines"}, {lines})});
}

void lamperti_cb(ExperimentContext& ctx) {
  const LaplaceExponent psi = exponent_of(ctx.cfg.at("exponent"));
  const double x0 = ctx.num("x0"), t = ctx.num("t");
  const std::size_t n = ctx.count("n");
  ctx.n = n;
  CbOptions o;
  o.h = ctx.num("h");
  o.record = false;
  const auto z = replicate<double>(ctx, n, 0, [&](Rng& rng) { return simulate_cb(psi, x0, t, o, rng).final_state().z; });
  const auto m = mean_se(z);
  ctx.z_check("mean", m.mean, m.se, x0 * std::exp(-psi.derivative(0.0) * t));
  const auto f = [&psi](double l) { return psi(l); };
  for (double lambda : ctx.cfg.at("lambdas").get<std::vector<double>>()) {
    std::vector<double> e;
    for (double v : z) e.push_back(std::exp(-lambda * v));
    const auto me = mean_se(e);
    const double u = semigroup_u(f, lambda, t);
    ctx.z_check("laplace_lambda_" + json(lambda).dump(), me.mean, me.se, std::exp(-x0 * u), 3.0, {{"u_t", u}});
  }
  double worst = 0.0;
  for (double lambda : {0.5, 1.0, 2.0, 10.0})
    for (double s : {0.1, 1.0, 5.0})
      worst = std::max(worst, std::abs(semigroup_u([](double q) { return q * q; }, lambda, s) - lambda / (1.0 + lambda * s)));
  ctx.abs_check("integrator_closed_form", worst, 0.0, 1e-8);
  ctx.files.push_back({"lamperti-cb.samples.csv", column_csv<double>({"z"}, {z})});
}

void ray_knight(ExperimentContext& ctx) {
  const LaplaceExponent psi = exponent_of(ctx.cfg.at("exponent"));
  const SplittingModel model(psi, tree_options(ctx));
  const double x = ctx.num("x"), a = ctx.num("a"), A = ctx.num("A"), bin = ctx.num("bin");
  const std::size_t n = ctx.count("n");
  ctx.n = n;
  struct Level {
    double z2 = 0.0;
    long z1 = 0;
  };
  const auto forest = replicate<Level>(ctx, n, 0, [&](Rng& rng) {
    const EtaForest f = model.eta_x(x, A, rng);
    const CadlagPath H = continuous_height(f.contour, psi.beta());
    std::vector<const ChronologicalTree*> lines;
    for (const auto& t : f.prolific) lines.push_back(&t);
    const LevelProfile p = level_profile(H, lines, {a}, bin, A);
    return Level{p.z2[0], p.z1[0]};
  });
  CbOptions o;
  o.h = ctx.num("h_cb");
  o.record = false;
  o.checkpoints = {a};
  const auto cb = replicate<double>(ctx, n, 1, [&](Rng& rng) {
    const BranchingPath p = simulate_cb(psi, x, a + bin, o, rng);
    const auto it = std::lower_bound(p.times.begin(), p.times.end(), a);
    const double at_a = p.theta[static_cast<std::size_t>(it - p.times.begin())];
    return (p.theta.back() - at_a) / bin;
  });
  std::vector<double> z2;
  std::vector<long> z1;
  for (const auto& l : forest) z2.push_back(l.z2), z1.push_back(l.z1);
  const double g = -psi.derivative(0.0);
  const double target = std::abs(g) < 1e-14 ? x : x * (std::exp(g * (a + bin)) - std::exp(g * a)) / (g * bin);
  const auto mt = mean_se(z2), mc = mean_se(cb);
  ctx.p_check("z2_vs_cb_ks", stats::ks_two_sample(z2, cb),
              {{"mean_forest", mt.mean}, {"mean_cb", mc.mean}, {"epsilon_g", nullptr},
               {"compact_part", "exact Psi# path; no graft threshold, no threshold bias"}});
  ctx.z_check("forest_mean", mt.mean, mt.se, target);
  ctx.z_check("cb_mean", mc.mean, mc.se, target);
  ctx.files.push_back({"ray-knight.samples.csv",
                       column_csv<double>({"z2_forest", "z1_forest", "z_cb_bin_average"}, {z2, to_double(z1), cb})});
}

double total_z1_rate(const LaplaceExponent& psi) {
  double r = 0.0;
  for (int k = 1; k < 2000; ++k) {
    const double term = twotype_jump_rate(psi, k);
    r += term;
    if (k > 5 && term < 1e-18) break;
  }
  return r;
}

struct FirstJump {
  double time = 0.0;
  long size = 0;
};

std::vector<FirstJump> first_jumps(const ExperimentContext& ctx, const LaplaceExponent& psi, std::size_t n,
                                   std::uint64_t arm) {
  CbOptions o;
  o.h = ctx.num("h");
  o.record = false;
  o.stop_after_z1_jumps = 1;
  const double horizon = ctx.num("horizon");
  return replicate<FirstJump>(ctx, n, arm, [&](Rng& rng) {
    const BranchingPath p = simulate_twotype(psi, {1, 0.0}, horizon, o, rng);
    if (p.terminal != BranchTerminal::stopped) throw HorizonOverflow("no Z1 jump before the horizon");
    return FirstJump{p.times.back(), p.n.back() - 1};
  });
}

void twotype_rates_exp(ExperimentContext& ctx) {
  const LaplaceExponent psi = exponent_of(ctx.cfg.at("exponent"));
  const std::size_t n = ctx.count("n");
  ctx.n = n;
  const double beta_b = psi.beta() * psi.b();
  ctx.abs_check("k1_rate_formula", twotype_jump_rate(psi, 1), beta_b + psi.coupled_jump_rate(1), 1e-12,
                {{"beta_b", beta_b}});
  const double total = total_z1_rate(psi);
  const auto jumps = first_jumps(ctx, psi, n, 0);
  std::vector<double> times;
  std::vector<long> sizes;
  for (const auto& j : jumps) times.push_back(j.time), sizes.push_back(j.size);
  double sum = 0.0;
  for (double t : times) sum += t;
  const double rate = static_cast<double>(n) / sum;
  ctx.z_check("first_jump_rate", rate, rate / std::sqrt(static_cast<double>(n)), total);
  const auto pmf = [&](long k) { return twotype_jump_rate(psi, static_cast<int>(k)) / total; };
  ctx.p_check("jump_size_gof", stats::chi_square_gof(sizes, pmf, 1), {{"p_k1", pmf(1)}, {"p_k2", pmf(2)}});
  // Without jumps Z1 is Yule with rate beta b.
  const LaplaceExponent quad = exponent_of(ctx.cfg.at("exponent_yule"));
  const std::size_t ny = ctx.count("n_yule");
  const auto yj = first_jumps(ctx, quad, ny, 1);
  std::vector<double> yt;
  long non_unit = 0;
  for (const auto& j : yj) yt.push_back(j.time), non_unit += j.size != 1;
  const double rb = quad.beta() * quad.b();
  ctx.p_check("yule_first_jump_ks", stats::ks_one_sample(yt, [rb](double t) { return -std::expm1(-rb * t); }),
              {{"rate", rb}});
  ctx.exact_check("yule_unit_jumps", static_cast<std::size_t>(non_unit), ny);
  ctx.files.push_back({"twotype-rates.samples.csv",
                       column_csv<double>({"first_jump_time", "jump_size"}, {times, to_double(sizes)})});
}

void twotype_generator_exp(ExperimentContext& ctx) {
  const double t = ctx.num("t");
  const std::size_t n = ctx.count("n");
  ctx.n = n;
  CbOptions o;
  o.h = ctx.num("h");
  o.record = false;
  const auto pairs = ctx.cfg.at("pairs").get<std::vector<std::vector<double>>>();
  const LaplaceExponent quad = exponent_of(ctx.cfg.at("exponent_quadratic"));
  ctx.abs_check("spot_value_quadratic", twotype_generator(quad, {1, 0.0}, 0.5, 0.0), -0.25, 1e-12);
  std::uint64_t arm = 0;
  std::vector<std::vector<double>> cols;
  std::vector<std::string> names;
  for (const char* key : {"exponent_quadratic", "exponent_atom"}) {
    const LaplaceExponent psi = exponent_of(ctx.cfg.at(key));
    const std::string tag = std::string(key).substr(9);
    const auto run = [&](double tt) {
      return replicate<TwoTypeState>(ctx, n, arm++, [&](Rng& rng) {
        return simulate_twotype(psi, {1, 0.0}, tt, o, rng).final_state();
      });
    };
    const auto full = run(t), half = run(t / 2.0);
    std::vector<double> n_col, z_col;
    for (const auto& s : full) n_col.push_back(static_cast<double>(s.n)), z_col.push_back(s.z);
    names.push_back("n_" + tag), names.push_back("z_" + tag);
    cols.push_back(n_col), cols.push_back(z_col);
    for (const auto& pr : pairs) {
      const double s = pr.at(0), lambda = pr.at(1);
      const auto functional = [&](const std::vector<TwoTypeState>& v) {
        std::vector<double> out;
        for (const auto& st : v) out.push_back(std::pow(s, static_cast<double>(st.n)) * std::exp(-lambda * st.z));
        return mean_se(out);
      };
      const auto mf = functional(full), mh = functional(half);
      const double d_full = (mf.mean - s) / t, d_half = (mh.mean - s) / (t / 2.0);
      const double se = mf.se / t;
      const double C = std::abs(d_half - d_full) / (t / 2.0);
      const double g = twotype_generator(psi, {1, 0.0}, s, lambda);
      const std::string id = tag + "_s" + json(s).dump() + "_l" + json(lambda).dump();
      ctx.abs_check("finite_difference_" + id, d_full, g, 3.0 * se + C * t,
                    {{"se", se}, {"C", C}, {"d_half", d_half}});
      ctx.z_check("semigroup_" + id, mf.mean, mf.se, twotype_semigroup(psi, {1, 0.0}, s, lambda, t));
      ctx.abs_check("generator_forms_" + id, g, twotype_generator_from_semigroup(psi, {1, 0.0}, s, lambda), 1e-5);
    }
  }
  ctx.files.push_back({"twotype-generator.samples.csv", column_csv<double>(names, cols)});
}

void cross_construction(ExperimentContext& ctx) {
  const double a = ctx.num("a"), r = ctx.num("r"), bin = ctx.num("bin");
  const std::size_t n = ctx.count("n");
  ctx.n = n;
  CbOptions o;
  o.h = ctx.num("h");
  o.record = false;
  const auto twotype_z1 = [&](const LaplaceExponent& psi, std::uint64_t arm) {
    return replicate<long>(ctx, n, arm, [&](Rng& rng) { return simulate_twotype(psi, {1, 0.0}, a, o, rng).final_state().n; });
  };
  // Contour route: Upsilon_tree, lines recovered from the contour tips.
  const LaplaceExponent quad = exponent_of(ctx.cfg.at("exponent_quadratic"));
  const SplittingModel model(quad, tree_options(ctx));
  const auto tree_z1 = replicate<long>(ctx, n, 0, [&](Rng& rng) {
    const UpsilonTree u = model.upsilon_tree(r, rng);
    const ChronologicalTree lines = reconstruct(skeleton_from_contour(u.contour), r);
    const LevelProfile p = level_profile(continuous_height(u.contour, quad.beta()), {&lines}, {a}, bin, r);
    return p.z1[0];
  });
  const auto tt_quad = twotype_z1(quad, 1);
  ctx.p_check("upsilon_vs_twotype_chi_square", stats::chi_square_two_sample(tree_z1, tt_quad),
              {{"mean_upsilon", mean_se(to_double(tree_z1)).mean}, {"mean_twotype", mean_se(to_double(tt_quad)).mean}});
  // Poisson genealogy route with a jump exponent.
  const LaplaceExponent atom = exponent_of(ctx.cfg.at("exponent_atom"));
  const GenealogySampler sampler(atom);
  const auto gen_z1 = replicate<long>(ctx, n, 2, [&](Rng& rng) {
    const Genealogy g = sampler.sample(r, rng);
    const LevelProfile p = level_profile(CadlagPath{}, {&g.lines}, {a}, bin, r);
    return p.z1[0];
  });
  const auto tt_atom = twotype_z1(atom, 3);
  ctx.p_check("genealogy_vs_twotype_chi_square", stats::chi_square_two_sample(gen_z1, tt_atom),
              {{"mean_genealogy", mean_se(to_double(gen_z1)).mean}, {"mean_twotype", mean_se(to_double(tt_atom)).mean},
               {"series_gap", sampler.series_gap()}});
  ctx.files.push_back({"cross-construction.samples.csv",
                       column_csv<long>({"z1_upsilon", "z1_twotype_quadratic", "z1_genealogy", "z1_twotype_atom"},
                                        {tree_z1, tt_quad, gen_z1, tt_atom})});
}

void discrete_generations_exp(ExperimentContext& ctx) {
  const std::size_t n = ctx.count("n_trees"), budget = ctx.count("node_budget");
  ctx.n = 2 * n;
  const double c = ctx.num("birth_rate"), rate = ctx.num("lifetime_rate");
  const LaplaceExponent psi = splitting_exponent(c, rate);
  SimOptions so;
  so.budget = budget;
  struct Outcome {
    bool match = false;
    long size = 0;
    long generations = 0;
  };
  const auto compare = [](const CadlagPath& contour, const ChronologicalTree& t) {
    const Generations from_contour = discrete_generations(contour);
    const Generations oracle = walk_generations(t);
    return Outcome{from_contour.sizes == oracle.sizes && from_contour.of_individual == oracle.of_individual,
                   static_cast<long>(t.size()), static_cast<long>(oracle.sizes.size())};
  };
  // Contours sampled as Levy paths, trees decoded from them.
  const auto levy = replicate<Outcome>(ctx, n, 0, [&](Rng& rng) {
    const CadlagPath f = simulate_levy(psi, rng.exponential(rate), StopRule::hit(0.0), so, rng);
    return compare(f, decode_jccp(f));
  });
  // Trees sampled directly, contours encoded from them.
  const auto direct = replicate<Outcome>(ctx, n, 1, [&](Rng& rng) {
    const ChronologicalTree t =
        random_splitting_tree(c, rate, std::numeric_limits<double>::infinity(), budget, rng);
    return compare(encode_jccp(t), t);
  });
  std::size_t bad_levy = 0, bad_direct = 0;
  std::vector<long> sizes, gens;
  for (const auto& o : levy) bad_levy += !o.match, sizes.push_back(o.size), gens.push_back(o.generations);
  for (const auto& o : direct) bad_direct += !o.match, sizes.push_back(o.size), gens.push_back(o.generations);
  ctx.exact_check("levy_contours", bad_levy, n);
  ctx.exact_check("encoded_trees", bad_direct, n);
  ctx.files.push_back({"discrete-generations.samples.csv", column_csv<long>({"size", "generations"}, {sizes, gens})});
}

void pruning_compatibility(ExperimentContext& ctx) {
  const SplittingModel model(exponent_of(ctx.cfg.at("exponent")), tree_options(ctx));
  const double r = ctx.num("r"), rp = ctx.num("r_prime");
  const std::size_t n = ctx.count("n");
  ctx.n = n;
  struct Battery {
    double lifetime = 0.0;
    double low_occupation = 0.0;
    long lines = 0;
    bool nested = true;
  };
  const auto measure = [r](const CadlagPath& g, long lines) {
    return Battery{g.lifetime(), occupation(g, 0.0, r / 2.0), lines, true};
  };
  const double mid = 0.5 * (r + rp);
  const auto pruned = replicate<Battery>(ctx, n, 0, [&](Rng& rng) {
    const CadlagPath f = model.nu_r(rp, rng);
    const CadlagPath g = time_change_below(f, r);
    const ChronologicalTree lines = reconstruct(skeleton_from_contour(f), rp);
    Battery out = measure(g, static_cast<long>(lines.alive_at(r)));
    const CadlagPath g2 = time_change_below(time_change_below(f, mid), r);
    out.nested = std::abs(g2.lifetime() - g.lifetime()) <= 1e-9 * std::max(1.0, g.lifetime()) &&
                 std::abs(occupation(g2, 0.0, r / 2.0) - out.low_occupation) <= 1e-9 * std::max(1.0, g.lifetime());
    return out;
  });
  const auto direct = replicate<Battery>(ctx, n, 1, [&](Rng& rng) {
    const CadlagPath f = model.nu_r(r, rng);
    return measure(f, static_cast<long>(f.tips.size()));
  });
  std::vector<double> la, lb, oa, ob;
  std::vector<long> ka, kb;
  std::size_t not_nested = 0;
  for (const auto& x : pruned) la.push_back(x.lifetime), oa.push_back(x.low_occupation), ka.push_back(x.lines), not_nested += !x.nested;
  for (const auto& x : direct) lb.push_back(x.lifetime), ob.push_back(x.low_occupation), kb.push_back(x.lines);
  ctx.p_check("lifetime_ks", stats::ks_two_sample(la, lb),
              {{"mean_pruned", mean_se(la).mean}, {"mean_direct", mean_se(lb).mean}});
  ctx.p_check("low_occupation_ks", stats::ks_two_sample(oa, ob),
              {{"mean_pruned", mean_se(oa).mean}, {"mean_direct", mean_se(ob).mean}});
  ctx.p_check("lines_at_r_chi_square", stats::chi_square_two_sample(ka, kb),
              {{"mean_pruned", mean_se(to_double(ka)).mean}, {"mean_direct", mean_se(to_double(kb)).mean}});
  ctx.exact_check("nested_truncation_pathwise", not_nested, n);
  ctx.files.push_back({"pruning-compatibility.samples.csv",
                       column_csv<double>({"lifetime_pruned", "occupation_pruned", "lines_pruned", "lifetime_direct",
                                           "occupation_direct", "lines_direct"},
                                          {la, oa, to_double(ka), lb, ob, to_double(kb)})});
}

}  // namespace

const std::vector<ExperimentDef>& registry() {
  static const std::vector<ExperimentDef> defs = {
      {"yule-geometric", "Yule population at height r against the geometric law",
       {{"seed", 101}, {"b", 0.7}, {"r", 1.0}, {"n", 50000}}, yule_geometric},
      {"grafting-equivalence", "nu^r against the contour of Upsilon_tree: lifetimes and level-r crossings",
       {{"seed", 102}, {"exponent", quadratic()}, {"r", 1.0}, {"n", 10000}, {"h", 1e-3}}, grafting_equivalence},
      {"spine-spacings", "birth heights along the first infinite line against Exp(b)",
       {{"seed", 103}, {"exponent", quadratic()}, {"r", 1.0}, {"n_trees", 12000}, {"min_spacings", 10000}, {"h", 1e-3}},
       spine_spacings},
      {"skeleton-roundtrip", "prolific skeleton extraction and reconstruction",
       {{"seed", 104}, {"birth_rate", 1.5}, {"death_rate", 1.0}, {"r", 2.0}, {"n_trees", 1000}, {"node_budget", 1000000}},
       skeleton_roundtrip},
      {"lamperti-cb", "CB by Lamperti time change: mean and Laplace transform",
       {{"seed", 105}, {"exponent", quadratic()}, {"x0", 1.0}, {"t", 1.0}, {"n", 20000}, {"h", 1e-3},
        {"lambdas", json::array({0.5, 1.0, 2.0})}},
       lamperti_cb},
      {"ray-knight", "occupation of the eta_x height process against CB(Psi)",
       {{"seed", 106}, {"exponent", quadratic()}, {"x", 1.0}, {"a", 0.5}, {"A", 2.0}, {"bin", 0.05}, {"n", 10000},
        {"h", 1e-3}, {"h_cb", 1e-3}},
       ray_knight},
      {"twotype-rates", "first Z1 jump: rate and size law",
       {{"seed", 107}, {"exponent", atom_exponent()}, {"exponent_yule", quadratic()}, {"n", 20000}, {"n_yule", 20000},
        {"h", 1e-3}, {"horizon", 1000.0}},
       twotype_rates_exp},
      {"twotype-generator", "finite-difference generator of the two-type process",
       {{"seed", 108}, {"exponent_quadratic", quadratic()}, {"exponent_atom", atom_exponent()}, {"t", 0.01},
        {"n", 100000}, {"h", 1e-4}, {"pairs", json::array({json::array({0.5, 0.0}), json::array({0.8, 0.4})})}},
       twotype_generator_exp},
      {"cross-construction", "Z1 from tree constructions against the two-type process",
       {{"seed", 109}, {"exponent_quadratic", quadratic()}, {"exponent_atom", atom_exponent()}, {"a", 0.9}, {"r", 1.0},
        {"bin", 0.05}, {"n", 10000}, {"h", 1e-3}},
       cross_construction},
      {"discrete-generations", "generation sizes read from contours against a tree walk",
       {{"seed", 110}, {"birth_rate", 0.9}, {"lifetime_rate", 1.0}, {"n_trees", 1000}, {"node_budget", 1000000}},
       discrete_generations_exp},
      {"pruning-compatibility", "truncating nu^{r'} at r against nu^r",
       {{"seed", 111}, {"exponent", quadratic()}, {"r", 0.5}, {"r_prime", 1.0}, {"n", 10000}, {"h", 1e-3}},
       pruning_compatibility},
  };
  return defs;
}

}  // namespace ltree::detail
