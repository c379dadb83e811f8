#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace bibeta::stats {

double mean(std::span<const double> v);
/// Unbiased (n - 1) variance.
double variance(std::span<const double> v);
double pearson(std::span<const double> x, std::span<const double> y);
double skewness(std::span<const double> v);

/// Type-7 (linear interpolation) quantile of an ascending-sorted range.
double quantile_sorted(std::span<const double> sorted, double p);
/// Type-7 quantile of an unsorted range (copies and sorts).
double quantile(std::span<const double> v, double p);
double median(std::span<const double> v);

double normal_cdf(double z);
double normal_quantile(double p);
double beta_cdf(double a, double b, double x);
double beta_quantile(double a, double b, double p);

/// Complementary Kolmogorov distribution, P(K > lambda).
double kolmogorov_survival(double lambda);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// One-sample Kolmogorov-Smirnov test against a continuous CDF. The p-value
/// uses the asymptotic law with Stephens' small-sample correction.
KsResult ks_test(std::span<const double> values, const std::function<double(double)>& cdf);

/// Pearson chi-square test that integer counts are uniform over their bins.
double chi_square_uniform_pvalue(std::span<const std::size_t> counts);

struct Histogram {
  double lower = 0.0;
  double upper = 0.0;
  std::vector<std::size_t> counts;
};

Histogram histogram(std::span<const double> values, std::size_t bins);

}  // namespace bibeta::stats
