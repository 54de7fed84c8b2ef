#pragma once

// Kolmogorov-Smirnov statistics with asymptotic p-values.

#include <functional>
#include <vector>

namespace slowstart {

struct KsResult {
  double statistic = 0.0;  // sup-distance between the two CDFs
  double p_value = 1.0;
  double effective_n = 0.0;
};

/// Q_KS(x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2).
double kolmogorov_survival(double x);

/// Sup distance between the empirical CDFs of a and b; inputs need not be
/// sorted. Empty input gives statistic 0 and p-value 1.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Sup distance between the empirical CDF of `sample` and a continuous CDF.
KsResult ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf);

}  // namespace slowstart
