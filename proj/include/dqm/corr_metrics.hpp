#pragma once

#include <span>
#include <vector>

#include "dqm/datamodel.hpp"

namespace dqm {

enum class CorrelationKind { pearson, spearman, kendall_tau, goodman_kruskal_gamma };

/// Inputs are already pairwise-complete and of equal length (>= 3).
double correlation(CorrelationKind kind, std::span<const double> x, std::span<const double> y);

/// Concordant minus discordant pair counts and the tie counts behind tau-b
/// and gamma, via merge-sort counting.
struct PairCounts {
  double concordant = 0, discordant = 0;
  double tied_x = 0, tied_y = 0, tied_xy = 0;  // pairs tied in x / y / both
  double total = 0;
};
PairCounts pair_counts(std::span<const double> x, std::span<const double> y);

/// Uses population (1/n) moments.
double concordance_cc(std::span<const double> x, std::span<const double> y);

/// ICC(2,1): two-way random effects, single measure, absolute agreement.
/// Items with a missing rating are dropped; `dropped` receives their count.
double icc(const RatingsMatrix& m, std::size_t* dropped = nullptr);

using ContingencyTable = std::vector<std::vector<double>>;
/// sqrt(chi^2 / (n (min(r, c) - 1))) without bias correction.
double cramers_v(const ContingencyTable& table);

}  // namespace dqm
