#include "ltree/branching_proc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "ltree/errors.hpp"

namespace ltree {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Stop { reached, absorbed, exploded, budget };

// Lamperti construction Z_t = x + X(theta_t), theta_t = int_0^t Z ds. The
// Gaussian part and the drift are advanced over real-time mesh steps with the
// exact Feller transition; jumps and killing fire when theta crosses the
// exponential clocks of X.
struct CbCore {
  const LaplaceExponent& psi;
  const CbOptions& opt;
  Rng& rng;
  double beta;
  double drift;
  double jrate;
  double krate;
  std::size_t steps = 0;
  double theta = 0.0;

  CbCore(const LaplaceExponent& p, const CbOptions& o, Rng& r)
      : psi(p), opt(o), rng(r), beta(p.beta()), drift(p.drift()), jrate(p.jump_rate()), krate(p.kappa()) {}

  void record(BranchingPath& path, double t, long n, double y) const {
    if (opt.record) path.push(t, n, y, theta);
  }

  // Z after real time dt from y without jumps: N ~ Poisson(y e^{-a dt} k),
  // Z = Gamma(N, k) with k = a / (beta (1 - e^{-a dt})), a = -drift.
  double feller(double y, double dt) {
    if (beta <= 0.0) return y * std::exp(drift * dt);
    const double a = -drift;
    const double k = std::abs(a * dt) < 1e-12 ? 1.0 / (beta * dt) : a / (beta * -std::expm1(-a * dt));
    const long N = rng.poisson(y * std::exp(-a * dt) * k);
    return N > 0 ? rng.gamma(static_cast<double>(N), k) : 0.0;
  }

  double integral(double y, double y1, double dt) const {
    if (beta > 0.0) return 0.5 * (y + y1) * dt;
    return std::abs(drift * dt) < 1e-12 ? y * dt : y * std::expm1(drift * dt) / drift;
  }

  Stop advance(double& t, double& y, double target, BranchingPath& path, long n) {
    const double event_rate = jrate + krate;
    while (t < target) {
      if (!(y > 0.0)) {
        y = 0.0;
        t = target;
        return Stop::absorbed;
      }
      if (++steps > opt.budget) return Stop::budget;
      double dt = beta > 0.0 ? std::min(opt.h, target - t) : target - t;
      bool event = false;
      if (event_rate > 0.0) {
        // Clocks are memoryless, so one draw per step against the theta
        // the step is about to consume.
        const double c = rng.exponential(event_rate);
        const double horizon = integral(y, y * std::exp(drift * dt), dt);
        if (c < horizon) {
          dt = beta > 0.0 ? c / y
                          : (std::abs(drift) < 1e-12 ? c / y : std::log1p(drift * c / y) / drift);
          event = true;
        }
      }
      const double y1 = feller(y, dt);
      theta += integral(y, y1, dt);
      t = std::min(t + dt, target);
      y = y1;
      if (event && y > 0.0) {
        if (rng.uniform() * event_rate < jrate) {
          y += psi.sample_jump(rng);
        } else {
          y = kInf;
          path.push(t, n, y, theta);
          return Stop::exploded;
        }
      }
      if (!(y > 0.0)) {
        y = 0.0;
        path.push(t, n, 0.0, theta);
        t = target;
        return Stop::absorbed;
      }
      record(path, t, n, y);
    }
    return Stop::reached;
  }
};

// Runs CBI from (t, y) up to target; continuous immigration is deposited at
// a uniform time inside each h-step.
Stop cbi_segment(CbCore& core, const Immigration& phi, double& t, double& y, double target,
                 BranchingPath& path, long n) {
  Rng& rng = core.rng;
  const bool cont = phi.drift > 0.0;
  double next_jump = phi.jump_rate > 0.0 ? t + rng.exponential(phi.jump_rate) : kInf;
  while (t < target) {
    const double step_end = cont ? std::min(t + core.opt.h, target) : target;
    double deposit = cont ? t + rng.uniform() * (step_end - t) : kInf;
    const double amount = phi.drift * (step_end - t);
    for (;;) {
      const double e = std::min(deposit, next_jump);
      if (e > step_end) break;
      const Stop s = core.advance(t, y, e, path, n);
      if (s == Stop::exploded || s == Stop::budget) return s;
      if (deposit <= next_jump) {
        y += amount;
        deposit = kInf;
      } else {
        y += phi.source->sample_immigration_jump(rng);
        next_jump = t + rng.exponential(phi.jump_rate);
        path.push(t, n, y, core.theta);
      }
    }
    const Stop s = core.advance(t, y, step_end, path, n);
    if (s == Stop::exploded || s == Stop::budget) return s;
    if (++core.steps > core.opt.budget) return Stop::budget;
  }
  return Stop::reached;
}

BranchTerminal terminal_of(Stop s) {
  switch (s) {
    case Stop::absorbed: return BranchTerminal::absorbed;
    case Stop::exploded: return BranchTerminal::exploded;
    case Stop::budget: return BranchTerminal::budget;
    default: return BranchTerminal::horizon;
  }
}

long poisson_at_least_one(double m, Rng& rng) {
  if (m > 1.0) {
    for (;;) {
      const long j = rng.poisson(m);
      if (j >= 1) return j;
    }
  }
  double u = rng.uniform() * (-std::expm1(-m));
  double p = std::exp(-m);
  for (long j = 1;; ++j) {
    p *= m / static_cast<double>(j);
    if (u < p || j > 1000) return j;
    u -= p;
  }
}

}  // namespace

std::string to_string(BranchTerminal k) {
  switch (k) {
    case BranchTerminal::horizon: return "horizon";
    case BranchTerminal::absorbed: return "absorbed";
    case BranchTerminal::exploded: return "exploded";
    case BranchTerminal::budget: return "budget";
    case BranchTerminal::stopped: return "stopped";
  }
  return "?";
}

void BranchingPath::push(double t, long ni, double zi, double th) {
  if (!times.empty() && t <= times.back()) {
    n.back() = ni;
    z.back() = zi;
    theta.back() = th;
    return;
  }
  times.push_back(t);
  n.push_back(ni);
  z.push_back(zi);
  theta.push_back(th);
}

TwoTypeState BranchingPath::final_state() const {
  if (times.empty()) return {};
  return {n.back(), z.back()};
}

TwoTypeState BranchingPath::at(double t) const {
  if (times.empty() || t < times.front()) throw OutOfDomain("time before the start of the path");
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const auto i = static_cast<std::size_t>(it - times.begin()) - 1;
  return {n[i], z[i]};
}

void BranchingPath::write_csv(std::ostream& os) const {
  os.precision(17);
  os << "t,n,z,integral\n";
  for (std::size_t i = 0; i < times.size(); ++i)
    os << times[i] << ',' << n[i] << ',' << z[i] << ',' << theta[i] << '\n';
}

namespace {

std::vector<double> stops_until(const std::vector<double>& checkpoints, double T) {
  std::vector<double> out;
  for (double c : checkpoints)
    if (c > 0.0 && c < T) out.push_back(c);
  std::sort(out.begin(), out.end());
  out.push_back(T);
  return out;
}

}  // namespace

BranchingPath simulate_cb(const LaplaceExponent& psi, double x0, double T, const CbOptions& opt, Rng& rng) {
  if (!(x0 >= 0.0)) throw OutOfDomain("x0 must be >= 0");
  if (!(T >= 0.0)) throw OutOfDomain("T must be >= 0");
  BranchingPath path;
  path.push(0.0, 0, x0, 0.0);
  CbCore core(psi, opt, rng);
  double t = 0.0, y = x0;
  Stop s = Stop::reached;
  for (double target : stops_until(opt.checkpoints, T)) {
    s = core.advance(t, y, target, path, 0);
    if (s == Stop::exploded || s == Stop::budget) break;
    path.push(target, 0, y, core.theta);
  }
  path.terminal = terminal_of(s);
  return path;
}

Immigration Immigration::of(const LaplaceExponent& psi, double n) {
  Immigration im;
  im.drift = 2.0 * psi.beta() * n;
  if (psi.jump_rate() > 0.0) {
    im.jump_rate = n * psi.immigration_jump_rate();
    im.source = &psi;
  }
  return im;
}

BranchingPath simulate_cbi(const LaplaceExponent& sharp, const Immigration& phi, double x0, double T,
                           const CbOptions& opt, Rng& rng) {
  if (!(x0 >= 0.0)) throw OutOfDomain("x0 must be >= 0");
  if (phi.jump_rate > 0.0 && phi.source == nullptr) throw ConfigError("immigration jumps need a source");
  BranchingPath path;
  path.push(0.0, 0, x0, 0.0);
  CbCore core(sharp, opt, rng);
  double t = 0.0, y = x0;
  for (double target : stops_until(opt.checkpoints, T)) {
    const Stop s = cbi_segment(core, phi, t, y, target, path, 0);
    if (s != Stop::reached) {
      path.terminal = terminal_of(s);
      return path;
    }
    path.push(target, 0, y, core.theta);
  }
  path.terminal = BranchTerminal::horizon;
  return path;
}

TwoTypeRates twotype_rates(const LaplaceExponent& psi) {
  if (!psi.is_supercritical()) throw SubcriticalInput("two-type process needs b > 0");
  TwoTypeRates r;
  r.binary = psi.beta() * psi.b();
  r.jump = psi.jump_rate() > 0.0 ? psi.immigration_jump_rate() : 0.0;
  return r;
}

double twotype_jump_rate(const LaplaceExponent& psi, int k) {
  if (k < 1) return 0.0;
  double r = psi.coupled_jump_rate(k);
  if (k == 1) r += psi.beta() * psi.b();
  return r;
}

BranchingPath simulate_twotype(const LaplaceExponent& psi, TwoTypeState start, double T,
                               const CbOptions& opt, Rng& rng) {
  if (start.n < 0 || !(start.z >= 0.0)) throw OutOfDomain("start state must lie in N x [0, inf)");
  const TwoTypeRates rates = twotype_rates(psi);
  const LaplaceExponent sharp = psi.sharp();
  const double b = psi.b();
  BranchingPath path;
  path.push(0.0, start.n, start.z, 0.0);
  CbCore core(sharp, opt, rng);
  double t = 0.0, z = start.z;
  long n = start.n;
  std::size_t jumps = 0;
  const std::vector<double> stops = stops_until(opt.checkpoints, T);
  std::size_t next_stop = 0;
  while (t < T) {
    const double next = n > 0 ? t + rng.exponential(static_cast<double>(n) * rates.total()) : kInf;
    const double target = std::min(next, stops[next_stop]);
    Immigration im;
    im.drift = 2.0 * psi.beta() * static_cast<double>(n);
    const Stop s = cbi_segment(core, im, t, z, target, path, n);
    if (s == Stop::budget || s == Stop::exploded) {
      path.terminal = terminal_of(s);
      return path;
    }
    if (next >= stops[next_stop]) {
      // The pending event clock is memoryless, so it is redrawn after a stop.
      path.push(t, n, z, core.theta);
      if (++next_stop == stops.size()) break;
      continue;
    }
    if (rng.uniform() * rates.total() < rates.binary) {
      n += 1;
      ++jumps;
    } else {
      const double y = psi.sample_immigration_jump(rng);
      const long j = poisson_at_least_one(b * y, rng);
      n += j - 1;
      z += y;
      if (j > 1) ++jumps;
    }
    path.push(t, n, z, core.theta);
    if (opt.stop_after_z1_jumps > 0 && jumps >= opt.stop_after_z1_jumps) {
      path.terminal = BranchTerminal::stopped;
      return path;
    }
  }
  path.terminal = BranchTerminal::horizon;
  return path;
}

double twotype_generator(const LaplaceExponent& psi, TwoTypeState st, double s, double lambda) {
  const double b = psi.b();
  const double e = std::exp(-lambda * st.z);
  const double n = static_cast<double>(st.n);
  double v = e * std::pow(s, n) * st.z * psi.psi_sharp(lambda);
  if (st.n > 0)
    v += e * n * std::pow(s, n - 1.0) * (psi(lambda + b * (1.0 - s)) - psi(lambda + b)) / b;
  return v;
}

double twotype_semigroup(const LaplaceExponent& psi, TwoTypeState st, double s, double lambda, double t) {
  const double b = psi.b();
  const auto f = [&](double l) { return psi(l); };
  const double ua = semigroup_u(f, lambda + b, t, 1e-12);
  const double ub = semigroup_u(f, lambda + b * (1.0 - s), t, 1e-12);
  return std::exp(-st.z * (ua - b)) * std::pow((ua - ub) / b, static_cast<double>(st.n));
}

double twotype_generator_from_semigroup(const LaplaceExponent& psi, TwoTypeState st, double s,
                                        double lambda, double t) {
  const double f0 = std::pow(s, static_cast<double>(st.n)) * std::exp(-lambda * st.z);
  const auto d = [&](double tt) { return (twotype_semigroup(psi, st, s, lambda, tt) - f0) / tt; };
  return 2.0 * d(t / 2.0) - d(t);
}

double cbi_mean(const LaplaceExponent& sharp, double drift, double jump_mean_rate, double x0, double T) {
  const double a = -sharp.derivative(0.0);
  const double d = drift + jump_mean_rate;
  if (std::abs(a) < 1e-14) return x0 + d * T;
  const double g = std::exp(a * T);
  return x0 * g + d * (g - 1.0) / a;
}

}  // namespace ltree
