#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tracerflow {

double mean(std::span<const double> xs);

/// Unbiased sample variance; 0 for fewer than two samples.
double sample_variance(std::span<const double> xs);

/// Standard error of the mean.
double standard_error(std::span<const double> xs);

double median(std::vector<double> xs);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic Kolmogorov
/// distribution (Stephens' small-sample correction on the argument).
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Survival function of the Kolmogorov distribution, P(K > lambda).
double kolmogorov_survival(double lambda);

}  // namespace tracerflow
