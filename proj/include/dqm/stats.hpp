#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dqm::stats {

double mean(std::span<const double> x);
/// Variance with denominator n - ddof.
double variance(std::span<const double> x, int ddof = 1);
double sd(std::span<const double> x, int ddof = 1);

/// Type-7 quantile (linear interpolation between closest ranks) of sorted data.
double quantile_sorted(std::span<const double> sorted, double p);
double quantile(std::span<const double> x, double p);

/// 1-based ranks with ties replaced by their average rank.
std::vector<double> average_ranks(std::span<const double> x);

/// Upper tail probabilities.
double normal_sf(double z);
double chi2_sf(double x, double df);
/// P(K > x) for the Kolmogorov distribution.
double kolmogorov_sf(double x);

}  // namespace dqm::stats
