#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace nlsgd::stats {

struct KsResult {
  double statistic = 0.0;  // sup |F_n - F|
  double p_value = 1.0;
};

/// Survival function of the Kolmogorov distribution, P(K > lambda).
double kolmogorov_sf(double lambda);

/// One-sample KS test. `samples` is sorted in place.
KsResult ks_one_sample(std::vector<double>& samples,
                       const std::function<double(double)>& cdf);

/// Two-sample KS test. Both inputs are sorted in place.
KsResult ks_two_sample(std::vector<double>& a, std::vector<double>& b);

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation (n - 1)
  double stderr_mean = 0.0;
};

MeanStd mean_std(std::span<const double> values);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y ~ slope * x + intercept. r^2 is 1 for an exact fit
/// and for constant y.
LineFit least_squares(std::span<const double> x, std::span<const double> y);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);

}  // namespace nlsgd::stats
