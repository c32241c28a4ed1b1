#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace ltree::stats {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  double dof = 0.0;  // chi-square tests only
  std::size_t bins = 0;
};

// P(chi2_dof > x)
double chi_square_tail(double x, double dof);
// Kolmogorov survival function Q(l) = 2 sum (-1)^{k-1} exp(-2 k^2 l^2).
double kolmogorov_q(double l);

// Pearson test of integer samples against a pmf on {kmin, kmin+1, ...}.
// Cells are merged left to right until each expects >= 5; everything past
// the last cell forms a tail cell. Needs N >= 1000.
TestResult chi_square_gof(const std::vector<long>& samples, const std::function<double(long)>& pmf,
                          long kmin);

// Homogeneity test of two integer samples; cells merged until each pooled
// cell expects >= 5 in both samples.
TestResult chi_square_two_sample(const std::vector<long>& a, const std::vector<long>& b);

// One-sample KS with the Stephens small-sample correction.
TestResult ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf);
// Two-sample KS; ties are resolved by evaluating both ecdfs after each
// distinct value. Needs both sizes >= 500.
TestResult ks_two_sample(std::vector<double> a, std::vector<double> b);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  double sd = 0.0;
  std::size_t n = 0;
};
MeanSe mean_se(const std::vector<double>& x);

// Two-sided normal p-value of a z-score.
double normal_two_sided(double z);

}  // namespace ltree::stats
