#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dqm/datamodel.hpp"

namespace dqm {

using Warnings = std::vector<std::string>;

struct SummaryStats {
  double min = 0, max = 0, range = 0;
  double q1 = 0, median = 0, q3 = 0, iqr = 0;
  double mean = 0;
  std::optional<double> std;  // needs n >= 2
  std::size_t n = 0;
};

/// Quartiles use the type-7 rule; std has an n-1 denominator.
SummaryStats summary_stats(std::span<const double> s);

/// Hill number of order q over the category proportions.
double hill_number(const CategoricalCounts& c, double q = 2.0);

double cohens_d(std::span<const double> a, std::span<const double> b);

/// n x d matrix of precomputed feature vectors, row-major.
struct EmbeddingSet {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> data;

  EmbeddingSet() = default;
  EmbeddingSet(std::size_t rows, std::size_t dims) : n(rows), d(dims), data(rows * dims, 0.0) {}
  static EmbeddingSet from_rows(const std::vector<std::vector<double>>& rows);
  static EmbeddingSet from_sample(std::span<const double> s);

  double at(std::size_t i, std::size_t j) const { return data[i * d + j]; }
  double& at(std::size_t i, std::size_t j) { return data[i * d + j]; }
  const double* row(std::size_t i) const { return data.data() + i * d; }
};

struct Kernel {
  enum class Kind { rbf, polynomial };
  Kind kind = Kind::rbf;
  /// RBF bandwidth; unset means the median heuristic.
  std::optional<double> bandwidth;
  int degree = 3;
  double coef = 1.0;

  static Kernel rbf(std::optional<double> bw = std::nullopt) { return {Kind::rbf, bw, 3, 1.0}; }
  static Kernel polynomial(int degree, double coef) { return {Kind::polynomial, std::nullopt, degree, coef}; }
};

/// Optional random subsampling for the quadratic-cost estimators.
struct Subsample {
  std::optional<std::size_t> size;
  std::uint64_t seed = 0;
};

struct MmdResult {
  double value = 0;
  std::optional<double> bandwidth;  // resolved RBF bandwidth
  std::size_t n_a = 0, n_b = 0;
  Warnings warnings;
};

/// Biased (V-statistic) estimate, reported as sqrt(max(0, MMD^2)).
MmdResult mmd(const EmbeddingSet& a, const EmbeddingSet& b, const Kernel& kernel = {}, const Subsample& sub = {});
MmdResult mmd(std::span<const double> a, std::span<const double> b, const Kernel& kernel = {},
              const Subsample& sub = {});

/// Median of the pairwise Euclidean distances of the pooled rows.
double median_pairwise_distance(const EmbeddingSet& pooled);

/// 2E|X-Y| - E|X-X'| - E|Y-Y'| over all pairs (no square root).
double energy_distance(std::span<const double> a, std::span<const double> b, const Subsample& sub = {});

enum class DivergenceKind { kl, js, psi };

struct DivergenceOptions {
  bool strict = false;
  double epsilon = 1e-6;
};

struct DivergenceResult {
  double value = 0;
  bool smoothed = false;
  Warnings warnings;
};

/// Divergence between two count vectors over the same categories (nats).
DivergenceResult divergence(DivergenceKind kind, const CategoricalCounts& p, const CategoricalCounts& q,
                            const DivergenceOptions& opts = {});

/// Discretizes two samples on common edges computed from the pooled values.
std::pair<CategoricalCounts, CategoricalCounts> binned_pair(std::span<const double> a, std::span<const double> b,
                                                            const Binning& binning = {});

struct TestOutcome {
  double statistic = 0;
  std::optional<double> p_value;
  std::string method;
  std::size_t n_a = 0, n_b = 0;
  std::map<std::string, double> extra;
  Warnings warnings;
};

TestOutcome ks_test(std::span<const double> a, std::span<const double> b);
/// Reports U for the first sample. Exact p when both sizes are <= exact_limit.
TestOutcome mann_whitney_u(std::span<const double> a, std::span<const double> b, std::size_t exact_limit = 8);
/// k-sample test on midranks, standardized statistic.
TestOutcome anderson_darling(const std::vector<std::vector<double>>& samples);
TestOutcome epps_singleton(std::span<const double> a, std::span<const double> b,
                           std::vector<double> t = {0.4, 0.8});
/// 2 x K homogeneity test of two count vectors over the same categories.
TestOutcome chi_squared(const CategoricalCounts& a, const CategoricalCounts& b);

/// Distance between the empirical distributions, order p >= 1.
double wasserstein_1d(std::span<const double> a, std::span<const double> b, double order = 1.0);

/// Frechet distance between Gaussian fits of two embedding sets.
double frechet_distance(const EmbeddingSet& a, const EmbeddingSet& b, Warnings* warnings = nullptr);

/// Unbiased MMD^2 with kernel (x.y/d + coef)^degree.
double kid(const EmbeddingSet& a, const EmbeddingSet& b, int degree = 3, double coef = 1.0,
           const Subsample& sub = {}, Warnings* warnings = nullptr);

}  // namespace dqm
