#include "dqm/corr_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dqm/error.hpp"
#include "dqm/stats.hpp"

namespace dqm {

namespace {

void check_pair(std::span<const double> x, std::span<const double> y, std::size_t min_n) {
  if (x.size() != y.size())
    throw Error(ErrorKind::invalid_argument, "paired inputs differ in length (" + std::to_string(x.size()) +
                                                 " vs " + std::to_string(y.size()) + ")");
  if (x.size() < min_n)
    throw Error(ErrorKind::insufficient_data,
                "need at least " + std::to_string(min_n) + " complete pairs, got " + std::to_string(x.size()));
}

double pearson_raw(std::span<const double> x, std::span<const double> y) {
  const double mx = stats::mean(x), my = stats::mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw Error(ErrorKind::insufficient_data, "correlation undefined: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// Tied pairs among runs of equal values in a sorted sequence.
template <typename Eq>
double tied_pairs(std::size_t n, Eq same_as_prev) {
  double t = 0.0, run = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    if (same_as_prev(i)) {
      run += 1.0;
    } else {
      t += run * (run - 1.0) / 2.0;
      run = 1.0;
    }
  }
  return t + run * (run - 1.0) / 2.0;
}

double merge_count(std::vector<double>& v, std::vector<double>& buf, std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0.0;
  const std::size_t mid = lo + (hi - lo) / 2;
  double swaps = merge_count(v, buf, lo, mid) + merge_count(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<double>(mid - i);
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

}  // namespace

PairCounts pair_counts(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y, 1);
  const std::size_t n = x.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });
  PairCounts pc;
  pc.total = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  pc.tied_x = tied_pairs(n, [&](std::size_t i) { return x[idx[i]] == x[idx[i - 1]]; });
  pc.tied_xy = tied_pairs(n, [&](std::size_t i) {
    return x[idx[i]] == x[idx[i - 1]] && y[idx[i]] == y[idx[i - 1]];
  });
  std::vector<double> ys(n), buf(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[idx[i]];
  // Strict inversions in y after sorting by (x, y) are the discordant pairs.
  pc.discordant = merge_count(ys, buf, 0, n);
  pc.tied_y = tied_pairs(n, [&](std::size_t i) { return ys[i] == ys[i - 1]; });
  pc.concordant = pc.total - pc.tied_x - pc.tied_y + pc.tied_xy - pc.discordant;
  return pc;
}

double correlation(CorrelationKind kind, std::span<const double> x, std::span<const double> y) {
  check_pair(x, y, 3);
  switch (kind) {
    case CorrelationKind::pearson:
      return pearson_raw(x, y);
    case CorrelationKind::spearman: {
      const auto rx = stats::average_ranks(x), ry = stats::average_ranks(y);
      return pearson_raw(rx, ry);
    }
    case CorrelationKind::kendall_tau: {
      const PairCounts pc = pair_counts(x, y);
      const double dx = pc.total - pc.tied_x, dy = pc.total - pc.tied_y;
      if (!(dx > 0.0) || !(dy > 0.0))
        throw Error(ErrorKind::insufficient_data, "Kendall's tau undefined: all pairs tied in one variable");
      return std::clamp((pc.concordant - pc.discordant) / std::sqrt(dx * dy), -1.0, 1.0);
    }
    case CorrelationKind::goodman_kruskal_gamma: {
      const PairCounts pc = pair_counts(x, y);
      if (!(pc.concordant + pc.discordant > 0.0))
        throw Error(ErrorKind::insufficient_data, "Goodman-Kruskal gamma undefined: all pairs tied");
      return (pc.concordant - pc.discordant) / (pc.concordant + pc.discordant);
    }
  }
  return 0.0;
}

double concordance_cc(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y, 2);
  const double mx = stats::mean(x), my = stats::mean(y);
  const double vx = stats::variance(x, 0), vy = stats::variance(y, 0);
  double cov = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) cov += (x[i] - mx) * (y[i] - my);
  cov /= static_cast<double>(x.size());
  const double denom = vx + vy + (mx - my) * (mx - my);
  if (!(denom > 0.0)) throw Error(ErrorKind::insufficient_data, "CCC undefined: both series constant and equal");
  return 2.0 * cov / denom;
}

double icc(const RatingsMatrix& m, std::size_t* dropped) {
  if (m.raters < 2) throw Error(ErrorKind::prerequisite, "ICC needs at least 2 raters");
  std::vector<std::vector<double>> rows;
  std::size_t skipped = 0;
  for (std::size_t i = 0; i < m.items; ++i) {
    std::vector<double> r;
    for (std::size_t j = 0; j < m.raters; ++j) {
      if (m.at(i, j)) r.push_back(*m.at(i, j));
    }
    if (r.size() == m.raters) {
      rows.push_back(std::move(r));
    } else {
      ++skipped;
    }
  }
  if (dropped) *dropped = skipped;
  if (rows.size() < 2) throw Error(ErrorKind::insufficient_data, "ICC needs at least 2 fully rated items");
  const double n = static_cast<double>(rows.size()), k = static_cast<double>(m.raters);
  double grand = 0.0;
  for (const auto& r : rows) grand += std::accumulate(r.begin(), r.end(), 0.0);
  grand /= n * k;
  double ssr = 0.0, ssc = 0.0, sst = 0.0;
  std::vector<double> col(m.raters, 0.0);
  for (const auto& r : rows) {
    const double rm = std::accumulate(r.begin(), r.end(), 0.0) / k;
    ssr += k * (rm - grand) * (rm - grand);
    for (std::size_t j = 0; j < r.size(); ++j) {
      col[j] += r[j];
      sst += (r[j] - grand) * (r[j] - grand);
    }
  }
  for (double c : col) ssc += n * (c / n - grand) * (c / n - grand);
  const double msr = ssr / (n - 1.0);
  const double msc = ssc / (k - 1.0);
  const double mse = std::max(0.0, sst - ssr - ssc) / ((n - 1.0) * (k - 1.0));
  if (!(msr > 0.0)) throw Error(ErrorKind::insufficient_data, "ICC undefined: zero between-item variance");
  const double denom = msr + (k - 1.0) * mse + k * (msc - mse) / n;
  if (!(denom > 0.0)) throw Error(ErrorKind::insufficient_data, "ICC undefined: nonpositive denominator");
  return (msr - mse) / denom;
}

double cramers_v(const ContingencyTable& table) {
  const std::size_t r = table.size();
  if (r < 2) throw Error(ErrorKind::insufficient_data, "Cramer's V needs at least 2 categories per variable");
  const std::size_t c = table.front().size();
  if (c < 2) throw Error(ErrorKind::insufficient_data, "Cramer's V needs at least 2 categories per variable");
  std::vector<double> rs(r, 0.0), cs(c, 0.0);
  double n = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    if (table[i].size() != c) throw Error(ErrorKind::invalid_argument, "ragged contingency table");
    for (std::size_t j = 0; j < c; ++j) {
      if (!(table[i][j] >= 0.0)) throw Error(ErrorKind::invalid_argument, "negative contingency count");
      rs[i] += table[i][j];
      cs[j] += table[i][j];
      n += table[i][j];
    }
  }
  for (double v : rs)
    if (!(v > 0.0)) throw Error(ErrorKind::insufficient_data, "Cramer's V undefined: a row marginal is zero");
  for (double v : cs)
    if (!(v > 0.0)) throw Error(ErrorKind::insufficient_data, "Cramer's V undefined: a column marginal is zero");
  double chi2 = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      const double e = rs[i] * cs[j] / n;
      chi2 += (table[i][j] - e) * (table[i][j] - e) / e;
    }
  }
  return std::min(1.0, std::sqrt(chi2 / (n * static_cast<double>(std::min(r, c) - 1))));
}

}  // namespace dqm
