#include "ltree/cadlag_path.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <ostream>

#include "ltree/errors.hpp"

namespace ltree {

std::string to_string(TerminalKind k) {
  switch (k) {
    case TerminalKind::killed: return "killed";
    case TerminalKind::hit_zero: return "hit_zero";
    case TerminalKind::horizon: return "horizon";
    case TerminalKind::infinite_proxy: return "infinite_proxy";
    case TerminalKind::escaped: return "escaped";
  }
  return "unknown";
}

std::size_t CadlagPath::segment(double t) const {
  if (knots.size() < 2) return 0;
  auto it = std::upper_bound(knots.begin(), knots.end(), t,
                             [](double v, const Knot& k) { return v < k.t; });
  std::size_t i = it == knots.begin() ? 0 : static_cast<std::size_t>(it - knots.begin()) - 1;
  return std::min(i, knots.size() - 2);
}

double CadlagPath::value(double t) const {
  if (knots.empty()) throw OutOfDomain("empty path");
  if (knots.size() == 1 || t <= knots.front().t) return knots.front().value;
  if (t >= knots.back().t) return knots.back().value;
  const std::size_t i = segment(t);
  const Knot& a = knots[i];
  const Knot& b = knots[i + 1];
  if (t == a.t) return a.value;
  return a.value + (b.left - a.value) * (t - a.t) / (b.t - a.t);
}

double CadlagPath::left_limit(double t) const {
  if (knots.empty()) throw OutOfDomain("empty path");
  if (knots.size() == 1 || t <= knots.front().t) return knots.front().value;
  if (t >= knots.back().t) return knots.back().left;
  const std::size_t i = segment(t);
  const Knot& a = knots[i];
  const Knot& b = knots[i + 1];
  if (t == a.t) return a.left;
  return a.value + (b.left - a.value) * (t - a.t) / (b.t - a.t);
}

bool CadlagPath::has_jumps() const {
  for (std::size_t i = 1; i < knots.size(); ++i)
    if (knots[i].value != knots[i].left) return true;
  return false;
}

double CadlagPath::min_value() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& k : knots) m = std::min({m, k.left, k.value});
  return m;
}

double CadlagPath::max_value() const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& k : knots) m = std::max({m, k.left, k.value});
  return m;
}

void CadlagPath::push(double t, double v) {
  if (knots.empty()) {
    knots.push_back({t, v, v});
    return;
  }
  if (t <= knots.back().t) {
    knots.back().value = v;
    return;
  }
  knots.push_back({t, v, v});
}

void CadlagPath::jump_to(double v) { knots.back().value = v; }

void CadlagPath::validate() const {
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (!std::isfinite(knots[i].t) || !std::isfinite(knots[i].left) || !std::isfinite(knots[i].value))
      throw MalformedPath("non-finite knot");
    if (i > 0 && !(knots[i].t > knots[i - 1].t)) throw MalformedPath("knot times not increasing");
  }
}

void CadlagPath::write_csv(std::ostream& os) const {
  os << "t,value,is_jump\n";
  os.precision(17);
  for (std::size_t i = 0; i < knots.size(); ++i) {
    const Knot& k = knots[i];
    if (i > 0 && k.value != k.left) {
      os << k.t << ',' << k.left << ",0\n";
      os << k.t << ',' << k.value << ",1\n";
    } else {
      os << k.t << ',' << k.value << ",0\n";
    }
  }
}

CadlagPath concatenate(const std::vector<CadlagPath>& parts) {
  CadlagPath out;
  bool any = false;
  for (const auto& p : parts) {
    if (p.empty()) continue;
    if (!any) {
      out.knots = p.knots;
      out.tips = p.tips;
      any = true;
    } else {
      if (out.terminal == TerminalKind::infinite_proxy)
        throw InfiniteInterior("non-final path has infinite lifetime");
      const double T = out.lifetime();
      out.knots.back().value = p.knots.front().value;
      out.knots.reserve(out.knots.size() + p.knots.size());
      for (std::size_t i = 1; i < p.knots.size(); ++i)
        out.knots.push_back({p.knots[i].t + T, p.knots[i].left, p.knots[i].value});
      for (double tip : p.tips) out.tips.push_back(tip + T);
    }
    out.terminal = p.terminal;
  }
  if (!any && !parts.empty()) out.terminal = parts.back().terminal;
  return out;
}

CadlagPath time_change_below(const CadlagPath& f, double r) {
  CadlagPath g;
  g.terminal = f.terminal;
  if (f.empty()) return g;
  const std::size_t n = f.knots.size();
  // kept time before knot i
  std::vector<double> acc(n, 0.0);
  double T = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    acc[i] = T;
    const Knot& a = f.knots[i];
    const Knot& b = f.knots[i + 1];
    const double v0 = a.value, v1 = b.left, dt = b.t - a.t;
    double ta, tb, va, vb;
    if (v0 <= r && v1 <= r) {
      ta = a.t, tb = b.t, va = v0, vb = v1;
    } else if (v0 <= r) {
      ta = a.t, va = v0, vb = r;
      tb = a.t + dt * (r - v0) / (v1 - v0);
    } else if (v1 <= r) {
      tb = b.t, vb = v1, va = r;
      ta = a.t + dt * (v0 - r) / (v0 - v1);
    } else {
      continue;
    }
    const double len = tb - ta;
    if (!(len > 0.0)) continue;
    if (g.knots.empty())
      g.knots.push_back({T, va, va});
    else
      g.knots.back().value = va;
    T += len;
    g.knots.push_back({T, vb, vb});
  }
  acc[n - 1] = T;
  for (double tip : f.tips) {
    if (f.value(tip) > r) continue;
    const std::size_t i = f.segment(tip);
    const Knot& a = f.knots[i];
    const Knot& b = f.knots[i + 1];
    double within = 0.0;
    if (tip > a.t) {
      const double v0 = a.value, v1 = b.left;
      const double u = tip;
      if (v0 <= r && v1 <= r)
        within = u - a.t;
      else if (v0 <= r)
        within = std::min(u, a.t + (b.t - a.t) * (r - v0) / (v1 - v0)) - a.t;
      else if (v1 <= r)
        within = std::max(0.0, u - (a.t + (b.t - a.t) * (v0 - r) / (v0 - v1)));
    }
    if (tip >= f.lifetime()) within = 0.0;
    g.tips.push_back((tip >= f.lifetime() ? acc[n - 1] : acc[i] + within));
  }
  return g;
}

CadlagPath post_minimum(const CadlagPath& f) {
  if (f.terminal != TerminalKind::infinite_proxy && f.terminal != TerminalKind::killed)
    throw MinNotSettled("path was not run to the margin rule");
  CadlagPath g;
  g.terminal = f.terminal;
  if (f.knots.empty()) return g;
  double m = std::numeric_limits<double>::infinity();
  std::size_t at = 0;
  double start = 0.0;
  for (std::size_t i = 0; i < f.knots.size(); ++i) {
    const Knot& k = f.knots[i];
    const double left = i == 0 ? k.value : k.left;
    if (left <= m) {
      m = left;
      at = i;
      start = k.value - left;
    }
    if (k.value <= m) {
      m = k.value;
      at = i;
      start = 0.0;
    }
  }
  if (at + 1 >= f.knots.size()) return g;
  const double t0 = f.knots[at].t;
  g.knots.push_back({0.0, start, start});
  for (std::size_t i = at + 1; i < f.knots.size(); ++i)
    g.knots.push_back({f.knots[i].t - t0, f.knots[i].left - m, f.knots[i].value - m});
  for (double tip : f.tips)
    if (tip >= t0) g.tips.push_back(tip - t0);
  return g;
}

CadlagPath shift_values(CadlagPath f, double dv) {
  for (auto& k : f.knots) {
    k.left += dv;
    k.value += dv;
  }
  return f;
}

std::pair<CadlagPath, CadlagPath> split_at(const CadlagPath& f, double t) {
  CadlagPath pre, post;
  post.terminal = f.terminal;
  pre.terminal = TerminalKind::horizon;
  if (f.empty()) return {pre, post};
  t = std::clamp(t, 0.0, f.lifetime());
  if (t > 0.0) {
    for (const auto& k : f.knots) {
      if (k.t < t)
        pre.knots.push_back(k);
      else
        break;
    }
    const double l = f.left_limit(t);
    pre.knots.push_back({t, l, l});
  }
  if (t < f.lifetime()) {
    const double v = f.value(t);
    post.knots.push_back({0.0, v, v});
    for (const auto& k : f.knots)
      if (k.t > t) post.knots.push_back({k.t - t, k.left, k.value});
  }
  for (double tip : f.tips) {
    if (tip < t)
      pre.tips.push_back(tip);
    else
      post.tips.push_back(tip - t);
  }
  return {pre, post};
}

double first_passage_below(const CadlagPath& f, double level, double from) {
  if (f.knots.empty()) return -1.0;
  if (f.value(from) <= level) return from;
  for (std::size_t i = f.segment(from); i + 1 < f.knots.size(); ++i) {
    const Knot& a = f.knots[i];
    const Knot& b = f.knots[i + 1];
    const double s = std::max(from, a.t);
    const double vs = s == a.t ? a.value : f.value(s);
    if (b.left <= level) {
      if (vs <= level) return s;
      return s + (b.t - s) * (vs - level) / (vs - b.left);
    }
    if (b.value <= level) return b.t;
  }
  return -1.0;
}

double time_at_or_below(const CadlagPath& f, double r) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < f.knots.size(); ++i) {
    const double v0 = f.knots[i].value, v1 = f.knots[i + 1].left;
    const double dt = f.knots[i + 1].t - f.knots[i].t;
    if (v0 <= r && v1 <= r)
      total += dt;
    else if (v0 <= r)
      total += dt * (r - v0) / (v1 - v0);
    else if (v1 <= r)
      total += dt * (r - v1) / (v0 - v1);
  }
  return total;
}

RangeMin::RangeMin(const CadlagPath& f) : f_(f) {
  const std::size_t n = f.knots.size();
  std::vector<double> low(n);
  for (std::size_t i = 0; i < n; ++i)
    low[i] = i == 0 ? f.knots[i].value : std::min(f.knots[i].left, f.knots[i].value);
  table_.push_back(std::move(low));
  for (std::size_t w = 1; 2 * w <= n; w *= 2) {
    const auto& prev = table_.back();
    std::vector<double> next(n - 2 * w + 1);
    for (std::size_t i = 0; i < next.size(); ++i) next[i] = std::min(prev[i], prev[i + w]);
    table_.push_back(std::move(next));
  }
}

double RangeMin::table_min(std::size_t lo, std::size_t hi) const {
  const std::size_t len = hi - lo + 1;
  const int k = std::bit_width(len) - 1;
  return std::min(table_[k][lo], table_[k][hi + 1 - (std::size_t{1} << k)]);
}

double RangeMin::inf(double s, double t) const {
  if (s > t) std::swap(s, t);
  if (s < 0.0 || t > f_.lifetime()) throw OutOfDomain("time outside [0, lifetime]");
  double m = std::min({f_.value(s), f_.left_limit(t), f_.value(t)});
  if (f_.knots.size() < 2) return m;
  const std::size_t i = f_.segment(s);
  std::size_t j = f_.segment(t);
  if (t >= f_.knots[j + 1].t) j = j + 1;
  if (i + 1 <= j) m = std::min(m, table_min(i + 1, j));
  return m;
}

double RangeMin::first_time_below(double s, double level) const {
  const double vs = f_.value(s);
  if (vs < level) return s;
  const std::size_t n = f_.knots.size();
  if (n < 2) return f_.lifetime();
  const std::size_t i = f_.segment(s);
  const Knot& b = f_.knots[i + 1];
  if (b.left < level) return s + (b.t - s) * (vs - level) / (vs - b.left);
  if (i + 1 >= n || table_min(i + 1, n - 1) >= level) return f_.lifetime();
  std::size_t lo = i + 1, hi = n - 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (table_min(i + 1, mid) < level)
      hi = mid;
    else
      lo = mid + 1;
  }
  const Knot& k = f_.knots[lo];
  if (k.left < level) {
    const Knot& a = f_.knots[lo - 1];
    return a.t + (k.t - a.t) * (a.value - level) / (a.value - k.left);
  }
  return k.t;
}

}  // namespace ltree
