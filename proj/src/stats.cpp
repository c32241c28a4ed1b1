#include "ltree/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "ltree/errors.hpp"

namespace ltree::stats {

double chi_square_tail(double x, double dof) {
  if (dof <= 0.0) throw DegenerateBinning("chi-square test with no degrees of freedom");
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, x / 2.0);
}

double kolmogorov_q(double l) {
  if (l < 0.2) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * l * l);
    s += (k % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

TestResult chi_square_gof(const std::vector<long>& samples, const std::function<double(long)>& pmf,
                          long kmin) {
  const std::size_t N = samples.size();
  if (N < 1000) throw DegenerateBinning("goodness-of-fit needs at least 1000 samples");
  std::map<long, std::size_t> counts;
  for (long s : samples) ++counts[s];
  const double n = static_cast<double>(N);
  // Observed mass below kmin has probability 0 under the law.
  std::size_t below = 0;
  for (const auto& [k, c] : counts)
    if (k < kmin) below += c;

  struct Cell {
    double expected = 0.0;
    double observed = 0.0;
  };
  std::vector<Cell> cells;
  double used = 0.0;
  Cell cur;
  long k = kmin;
  for (; k < kmin + 100000; ++k) {
    const double p = pmf(k);
    const double remaining = n * (1.0 - used - p);
    cur.expected += n * p;
    const auto it = counts.find(k);
    if (it != counts.end()) cur.observed += static_cast<double>(it->second);
    used += p;
    if (cur.expected >= 5.0 && remaining >= 5.0) {
      cells.push_back(cur);
      cur = {};
    }
    if (remaining < 5.0) break;
  }
  // Tail: k' > k plus whatever is still open.
  cur.expected += std::max(0.0, n * (1.0 - used));
  for (const auto& [kk, c] : counts)
    if (kk > k) cur.observed += static_cast<double>(c);
  if (cur.expected >= 5.0 || cells.empty()) {
    cells.push_back(cur);
  } else {
    cells.back().expected += cur.expected;
    cells.back().observed += cur.observed;
  }
  if (cells.size() < 2) throw DegenerateBinning("fewer than two cells after merging");
  TestResult r;
  for (const auto& c : cells) r.statistic += (c.observed - c.expected) * (c.observed - c.expected) / c.expected;
  if (below > 0) r.statistic = std::numeric_limits<double>::infinity();
  r.bins = cells.size();
  r.dof = static_cast<double>(cells.size() - 1);
  r.p_value = std::isfinite(r.statistic) ? chi_square_tail(r.statistic, r.dof) : 0.0;
  return r;
}

TestResult chi_square_two_sample(const std::vector<long>& a, const std::vector<long>& b) {
  if (a.empty() || b.empty()) throw DegenerateBinning("empty sample");
  std::map<long, std::pair<double, double>> counts;
  for (long v : a) counts[v].first += 1.0;
  for (long v : b) counts[v].second += 1.0;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double fa = na / (na + nb), fb = nb / (na + nb);
  std::vector<std::pair<double, double>> cells;
  std::pair<double, double> cur{0.0, 0.0};
  for (const auto& [k, c] : counts) {
    cur.first += c.first;
    cur.second += c.second;
    const double pooled = cur.first + cur.second;
    if (pooled * fa >= 5.0 && pooled * fb >= 5.0) {
      cells.push_back(cur);
      cur = {0.0, 0.0};
    }
  }
  if (cur.first + cur.second > 0.0) {
    if (cells.empty()) {
      cells.push_back(cur);
    } else {
      cells.back().first += cur.first;
      cells.back().second += cur.second;
    }
  }
  if (cells.size() < 2) throw DegenerateBinning("fewer than two cells after merging");
  TestResult r;
  const double ka = std::sqrt(nb / na), kb = std::sqrt(na / nb);
  for (const auto& [x, y] : cells) {
    const double d = ka * x - kb * y;
    r.statistic += d * d / (x + y);
  }
  r.bins = cells.size();
  r.dof = static_cast<double>(cells.size() - 1);
  r.p_value = chi_square_tail(r.statistic, r.dof);
  return r;
}

TestResult ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf) {
  if (x.empty()) throw DegenerateBinning("empty sample");
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double F = cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
  }
  TestResult r;
  r.statistic = d;
  const double sn = std::sqrt(n);
  r.p_value = kolmogorov_q((sn + 0.12 + 0.11 / sn) * d);
  return r;
}

TestResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.size() < 500 || b.size() < 500) throw DegenerateBinning("two-sample KS needs 500 values per sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() || j < b.size()) {
    double v;
    if (j >= b.size() || (i < a.size() && a[i] <= b[j]))
      v = a[i];
    else
      v = b[j];
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  TestResult r;
  r.statistic = d;
  const double ne = std::sqrt(na * nb / (na + nb));
  r.p_value = d == 0.0 ? 1.0 : kolmogorov_q((ne + 0.12 + 0.11 / ne) * d);
  return r;
}

MeanSe mean_se(const std::vector<double>& x) {
  MeanSe m;
  m.n = x.size();
  if (x.empty()) return m;
  double s = 0.0;
  for (double v : x) s += v;
  m.mean = s / static_cast<double>(x.size());
  double q = 0.0;
  for (double v : x) q += (v - m.mean) * (v - m.mean);
  if (x.size() > 1) m.sd = std::sqrt(q / static_cast<double>(x.size() - 1));
  m.se = m.sd / std::sqrt(static_cast<double>(x.size()));
  return m;
}

double normal_two_sided(double z) { return boost::math::erfc(std::abs(z) / std::sqrt(2.0)); }

}  // namespace ltree::stats
