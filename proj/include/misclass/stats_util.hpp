#pragma once

#include <span>
#include <string>
#include <vector>

namespace misclass {

// Sample quantile with linear interpolation between order statistics
// (Hyndman-Fan type 7). `values` need not be sorted.
double quantile(std::span<const double> values, double prob);

double mean(std::span<const double> values);
// Unbiased (n-1) sample variance.
double sample_variance(std::span<const double> values);

// Standard normal quantile.
double normal_quantile(double prob);

// Two-sample Kolmogorov-Smirnov statistic sup_x |F1(x) - F2(x)|.
double ks_distance(std::span<const double> a, std::span<const double> b);

// Shortest decimal text that parses back to the same double.
std::string format_roundtrip(double value);

} // namespace misclass
