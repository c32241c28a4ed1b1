#include "ltree/path_engine.hpp"

#include <cmath>
#include <limits>

#include "ltree/errors.hpp"

namespace ltree {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Event { none, jump, kill, limit };

struct Piece {
  double dt = 0.0;
  double end = 0.0;
  Event event = Event::none;
};

// Advances X by one piece: at most h long when beta > 0, otherwise up to the
// next jump or killing. `limit` caps the length; `floor_level` lets the
// drift-only case stop exactly on a level.
class Stepper {
 public:
  Stepper(const LaplaceExponent& psi, const SimOptions& opt, Rng& rng)
      : rng_(rng),
        drift_(psi.drift()),
        sigma2_(2.0 * psi.beta()),
        jump_rate_(psi.jump_rate()),
        kill_rate_(psi.kappa()),
        h_(opt.h),
        psi_(psi) {
    if (sigma2_ > 0.0 && !(h_ > 0.0)) throw InvalidExponent("mesh h must be > 0 when beta > 0");
  }

  Piece next(double x, double limit, double floor_level) {
    Piece p;
    const double clock_rate = jump_rate_ + kill_rate_;
    const double e = clock_rate > 0.0 ? rng_.exponential(clock_rate) : kInf;
    double dt = std::min(e, limit);
    if (sigma2_ > 0.0) dt = std::min(dt, h_);
    double to_floor = kInf;
    if (sigma2_ == 0.0 && drift_ < 0.0 && floor_level > -kInf)
      to_floor = (x - floor_level) / (-drift_);
    if (to_floor < dt) {
      p.dt = to_floor;
      p.end = floor_level;
      return p;
    }
    if (!std::isfinite(dt)) throw HorizonOverflow("no event ever stops the path");
    p.dt = dt;
    p.end = x + drift_ * dt;
    if (sigma2_ > 0.0) p.end += std::sqrt(sigma2_ * dt) * rng_.gauss();
    if (dt == e) {
      p.event = rng_.uniform() * clock_rate < jump_rate_ ? Event::jump : Event::kill;
    } else if (dt == limit) {
      p.event = Event::limit;
    }
    return p;
  }

  // Chance that the Brownian bridge between two values above `level`
  // dips below it during the piece.
  bool bridge_hits(double x, double end, double dt, double level) {
    if (sigma2_ == 0.0 || dt <= 0.0) return false;
    const double a = x - level, c = end - level;
    if (a <= 0.0 || c <= 0.0) return false;
    return rng_.uniform() < std::exp(-2.0 * a * c / (sigma2_ * dt));
  }

  double jump() { return psi_.sample_jump(rng_); }
  Rng& rng() { return rng_; }

 private:
  Rng& rng_;
  double drift_, sigma2_, jump_rate_, kill_rate_, h_;
  const LaplaceExponent& psi_;
};

double crossing_time(double t, double dt, double x, double end, double level) {
  return t + dt * (x - level) / (x - end);
}

}  // namespace

CadlagPath simulate_levy(const LaplaceExponent& psi, double x0, const StopRule& stop,
                         const SimOptions& opt, Rng& rng) {
  Stepper step(psi, opt, rng);
  CadlagPath path;
  path.push(0.0, x0);
  double t = 0.0, x = x0, runmin = x0;
  const bool hit = stop.kind == StopRule::Kind::hit_level;
  if (hit && x0 <= stop.level) {
    path.terminal = TerminalKind::hit_zero;
    return path;
  }
  for (std::size_t n = 0;; ++n) {
    if (n >= opt.budget) throw HorizonOverflow("piece budget exhausted before the stopping rule");
    const double limit = stop.kind == StopRule::Kind::horizon ? stop.horizon - t : kInf;
    const Piece p = step.next(x, limit, hit ? stop.level : -kInf);
    if (hit && (p.end <= stop.level || step.bridge_hits(x, p.end, p.dt, stop.level))) {
      const double tc = p.end > stop.level ? t + 0.5 * p.dt
                        : p.end == stop.level && p.event == Event::none
                            ? t + p.dt
                            : crossing_time(t, p.dt, x, p.end, stop.level);
      path.push(tc, stop.level);
      path.terminal = TerminalKind::hit_zero;
      return path;
    }
    t += p.dt;
    x = p.end;
    runmin = std::min(runmin, x);
    path.push(t, x);
    if (p.event == Event::kill) {
      path.terminal = TerminalKind::killed;
      return path;
    }
    if (p.event == Event::jump) {
      x += step.jump();
      path.jump_to(x);
    }
    if (p.event == Event::limit) {
      path.terminal = TerminalKind::horizon;
      return path;
    }
    if (stop.kind == StopRule::Kind::margin && x - runmin >= stop.margin) {
      path.terminal = TerminalKind::infinite_proxy;
      return path;
    }
  }
}

double default_margin(const LaplaceExponent& psi) {
  if (!psi.is_supercritical()) throw SubcriticalInput("margin needs b > 0");
  return std::log(1e6) / psi.b();
}

namespace {

enum class Band { fixed, post_minimum, relative };

// Shared walker for the time-changed samplers. In `fixed` mode the band is
// [0, r]; otherwise it is [m, m + r] with m the running minimum. Post-minimum
// mode records X - m and restarts at every new minimum; the other modes
// record X and stop on hitting 0.
CadlagPath walk_band(const LaplaceExponent& psi, double x0, double r, Band mode,
                     const SimOptions& opt, Rng& rng) {
  if (!(r > 0.0)) throw OutOfDomain("truncation level must be > 0");
  Stepper step(psi, opt, rng);
  const double b = psi.b();
  const bool post_min = mode == Band::post_minimum;
  const bool floored = !post_min;
  CadlagPath path;
  double base = mode == Band::fixed ? 0.0 : x0;
  double x = x0;
  double tau = 0.0;
  auto rec = [&](double v) { return post_min ? v - base : v; };
  path.push(0.0, rec(x));
  if (floored && x0 <= 0.0) {
    path.terminal = TerminalKind::hit_zero;
    return path;
  }
  auto escapes = [&](double v) {
    const double over = v - (base + r);
    return b > 0.0 && step.rng().uniform() >= std::exp(-b * over);
  };
  for (std::size_t n = 0;; ++n) {
    if (n >= opt.budget) throw HorizonOverflow("piece budget exhausted inside the band");
    const Piece p = step.next(x, kInf, floored ? 0.0 : -kInf);
    const double top = base + r;
    if (floored && (p.end <= 0.0 || step.bridge_hits(x, p.end, p.dt, 0.0))) {
      const double tc = p.end > 0.0 ? tau + 0.5 * p.dt
                        : p.end == 0.0 && p.event == Event::none
                            ? tau + p.dt
                            : crossing_time(tau, p.dt, x, p.end, 0.0);
      path.push(tc, 0.0);
      path.terminal = TerminalKind::hit_zero;
      return path;
    }
    if (p.end > top) {
      const double tc = crossing_time(tau, p.dt, x, p.end, top);
      path.push(tc, rec(top));
      double v = p.end;
      if (p.event == Event::kill) {
        path.terminal = TerminalKind::killed;
        return path;
      }
      if (p.event == Event::jump) v += step.jump();
      if (escapes(v)) {
        path.terminal = TerminalKind::escaped;
        return path;
      }
      tau = tc;
      x = top;
      continue;
    }
    tau += p.dt;
    x = p.end;
    if (mode != Band::fixed && x < base) {
      base = x;
      if (post_min) {
        tau = 0.0;
        path.clear();
      }
    }
    path.push(tau, rec(x));
    if (p.event == Event::kill) {
      path.terminal = TerminalKind::killed;
      return path;
    }
    if (p.event == Event::jump) {
      const double v = x + step.jump();
      if (v <= base + r) {
        x = v;
        path.jump_to(rec(x));
      } else {
        if (escapes(v)) {
          path.terminal = TerminalKind::escaped;
          return path;
        }
        x = base + r;
        path.jump_to(rec(x));
      }
    }
  }
}

CadlagPath normalize(CadlagPath p) {
  if (p.lifetime() <= 0.0) {
    p.knots.clear();
    p.tips.clear();
  }
  return p;
}

}  // namespace

CadlagPath simulate_below(const LaplaceExponent& psi, double x0, double r, const SimOptions& opt,
                          Rng& rng) {
  if (x0 < 0.0 || x0 > r) throw OutOfDomain("start must lie in [0, r]");
  return normalize(walk_band(psi, x0, r, Band::fixed, opt, rng));
}

CadlagPath simulate_post_minimum_below(const LaplaceExponent& psi, double r,
                                       const SimOptions& opt, Rng& rng) {
  if (!psi.is_supercritical() && psi.kappa() == 0.0)
    throw SubcriticalInput("post-minimum process needs b > 0");
  return normalize(walk_band(psi, 0.0, r, Band::post_minimum, opt, rng));
}

CadlagPath simulate_below_relative(const LaplaceExponent& psi, double x0, double r,
                                   const SimOptions& opt, Rng& rng) {
  if (x0 < 0.0) throw OutOfDomain("start must be >= 0");
  return normalize(walk_band(psi, x0, r, Band::relative, opt, rng));
}

CadlagPath simulate_post_minimum_below_margin(const LaplaceExponent& psi, double r, double K,
                                              const SimOptions& opt, Rng& rng) {
  CadlagPath full = simulate_levy(psi, 0.0, StopRule::with_margin(K), opt, rng);
  return normalize(time_change_below(post_minimum(full), r));
}

}  // namespace ltree
