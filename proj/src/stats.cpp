#include "dqm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "dqm/error.hpp"

namespace dqm::stats {

double mean(std::span<const double> x) {
  if (x.empty()) throw Error(ErrorKind::insufficient_data, "mean of an empty sample");
  // Two-pass for accuracy on large offsets.
  const double m0 = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double corr = 0.0;
  for (double v : x) corr += v - m0;
  return m0 + corr / static_cast<double>(x.size());
}

double variance(std::span<const double> x, int ddof) {
  if (x.size() <= static_cast<std::size_t>(ddof))
    throw Error(ErrorKind::insufficient_data, "variance needs more than " + std::to_string(ddof) + " value(s)");
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - static_cast<std::size_t>(ddof));
}

double sd(std::span<const double> x, int ddof) { return std::sqrt(variance(x, ddof)); }

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error(ErrorKind::insufficient_data, "quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::invalid_argument, "quantile level must be in [0, 1]");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double quantile(std::span<const double> x, double p) {
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  return quantile_sorted(s, p);
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

double chi2_sf(double x, double df) {
  if (!(df > 0.0)) throw Error(ErrorKind::invalid_argument, "chi-squared degrees of freedom must be positive");
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(df / 2.0, x / 2.0);
}

double kolmogorov_sf(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 1.18) {
    // Jacobi theta form converges fast for small x.
    const double y = std::exp(-M_PI * M_PI / (8.0 * x * x));
    double s = 0.0;
    for (int k = 1; k < 40; k += 2) s += std::pow(y, k * k);
    return std::clamp(1.0 - std::sqrt(2.0 * M_PI) / x * s, 0.0, 1.0);
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

}  // namespace dqm::stats
