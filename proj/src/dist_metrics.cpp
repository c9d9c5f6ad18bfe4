#include "dqm/dist_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Dense>

#include "dqm/error.hpp"
#include "dqm/stats.hpp"

namespace dqm {

namespace {

void require_size(std::span<const double> s, std::size_t n, const char* what) {
  if (s.size() < n)
    throw Error(ErrorKind::insufficient_data,
                std::string(what) + " needs at least " + std::to_string(n) + " value(s), got " +
                    std::to_string(s.size()));
}

std::vector<double> sorted_copy(std::span<const double> s) {
  std::vector<double> out(s.begin(), s.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> draw_indices(std::size_t n, std::size_t k, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

EmbeddingSet subsample_rows(const EmbeddingSet& e, std::size_t k, std::mt19937_64& rng) {
  if (k >= e.n) return e;
  EmbeddingSet out(k, e.d);
  auto idx = draw_indices(e.n, k, rng);
  for (std::size_t i = 0; i < k; ++i)
    std::copy(e.row(idx[i]), e.row(idx[i]) + e.d, out.data.begin() + static_cast<std::ptrdiff_t>(i * e.d));
  return out;
}

std::vector<double> subsample_values(std::span<const double> s, std::size_t k, std::mt19937_64& rng) {
  if (k >= s.size()) return {s.begin(), s.end()};
  std::vector<double> out;
  for (std::size_t i : draw_indices(s.size(), k, rng)) out.push_back(s[i]);
  return out;
}

// Rows with multiplicities; identical univariate values are merged.
struct Points {
  std::size_t d = 0;
  std::vector<double> coords;
  std::vector<double> weights;
  std::size_t size() const { return weights.size(); }
  const double* row(std::size_t i) const { return coords.data() + i * d; }
  double total() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }
};

Points compress(const EmbeddingSet& e) {
  Points p;
  p.d = e.d;
  if (e.d == 1) {
    auto v = e.data;
    std::sort(v.begin(), v.end());
    for (double x : v) {
      if (!p.coords.empty() && p.coords.back() == x) {
        p.weights.back() += 1.0;
      } else {
        p.coords.push_back(x);
        p.weights.push_back(1.0);
      }
    }
  } else {
    p.coords = e.data;
    p.weights.assign(e.n, 1.0);
  }
  return p;
}

double kernel_value(const Kernel& k, double bandwidth, const double* x, const double* y, std::size_t d) {
  if (k.kind == Kernel::Kind::rbf) {
    double sq = 0.0;
    for (std::size_t j = 0; j < d; ++j) sq += (x[j] - y[j]) * (x[j] - y[j]);
    return std::exp(-sq / (2.0 * bandwidth * bandwidth));
  }
  double dot = 0.0;
  for (std::size_t j = 0; j < d; ++j) dot += x[j] * y[j];
  return std::pow(dot / static_cast<double>(d) + k.coef, k.degree);
}

// Weighted mean of k(x, y) over all pairs (diagonal included).
double mean_kernel(const Points& a, const Points& b, const Kernel& k, double bw) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j) row += b.weights[j] * kernel_value(k, bw, a.row(i), b.row(j), a.d);
    s += a.weights[i] * row;
  }
  return s / (a.total() * b.total());
}

// Number of pairs i < j of sorted values with z[j] - z[i] <= t.
std::uint64_t count_pairs_within(const std::vector<double>& z, double t) {
  std::uint64_t c = 0;
  std::size_t j = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (j < i + 1) j = i + 1;
    while (j < z.size() && z[j] - z[i] <= t) ++j;
    c += j - i - 1;
  }
  return c;
}

// k-th smallest (0-based) pairwise difference of sorted values.
double kth_pairwise_difference(const std::vector<double>& z, std::uint64_t k) {
  if (count_pairs_within(z, 0.0) > k) return 0.0;
  double lo = 0.0, hi = z.back() - z.front();
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = lo + (hi - lo) / 2.0;
    if (mid <= lo || mid >= hi) break;
    if (count_pairs_within(z, mid) > k) hi = mid;
    else lo = mid;
  }
  double best = 0.0;
  std::size_t j = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (j < i + 1) j = i + 1;
    while (j < z.size() && z[j] - z[i] <= hi) ++j;
    if (j > i + 1) best = std::max(best, z[j - 1] - z[i]);
  }
  return best;
}

// Sum over all (i, j) of |a_i - b_j| for sorted inputs.
double sum_abs_between(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> prefix(b.size() + 1, 0.0);
  for (std::size_t j = 0; j < b.size(); ++j) prefix[j + 1] = prefix[j] + b[j];
  double s = 0.0;
  std::size_t c = 0;
  for (double x : a) {
    while (c < b.size() && b[c] <= x) ++c;
    const double below = x * static_cast<double>(c) - prefix[c];
    const double above = (prefix.back() - prefix[c]) - x * static_cast<double>(b.size() - c);
    s += below + above;
  }
  return s;
}

double sum_abs_within(const std::vector<double>& a) {
  const double n = static_cast<double>(a.size());
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * (2.0 * static_cast<double>(k) - n + 1.0);
  return 2.0 * s;
}

Eigen::MatrixXd to_matrix(const EmbeddingSet& e) {
  Eigen::MatrixXd m(e.n, e.d);
  for (std::size_t i = 0; i < e.n; ++i)
    for (std::size_t j = 0; j < e.d; ++j) m(i, j) = e.at(i, j);
  return m;
}

void check_embeddings(const EmbeddingSet& a, const EmbeddingSet& b) {
  if (a.d == 0 || b.d == 0) throw Error(ErrorKind::invalid_argument, "embedding dimension must be >= 1");
  if (a.d != b.d)
    throw Error(ErrorKind::invalid_argument, "embedding dimensions differ (" + std::to_string(a.d) + " vs " +
                                                 std::to_string(b.d) + ")");
  if (a.n < 2 || b.n < 2) throw Error(ErrorKind::insufficient_data, "each embedding set needs at least 2 rows");
  for (double v : a.data)
    if (!std::isfinite(v)) throw Error(ErrorKind::invalid_argument, "embedding contains non-finite entries");
  for (double v : b.data)
    if (!std::isfinite(v)) throw Error(ErrorKind::invalid_argument, "embedding contains non-finite entries");
}

}  // namespace

SummaryStats summary_stats(std::span<const double> s) {
  require_size(s, 1, "summary statistics");
  auto v = sorted_copy(s);
  SummaryStats out;
  out.n = v.size();
  out.min = v.front();
  out.max = v.back();
  out.range = out.max - out.min;
  out.q1 = stats::quantile_sorted(v, 0.25);
  out.median = stats::quantile_sorted(v, 0.5);
  out.q3 = stats::quantile_sorted(v, 0.75);
  out.iqr = out.q3 - out.q1;
  out.mean = stats::mean(v);
  if (v.size() >= 2) out.std = stats::sd(v, 1);
  return out;
}

double hill_number(const CategoricalCounts& c, double q) {
  c.validate();
  if (!(q >= 0.0) || !std::isfinite(q)) throw Error(ErrorKind::invalid_argument, "Hill order q must be >= 0");
  const double total = c.total();
  if (!(total > 0.0)) throw Error(ErrorKind::insufficient_data, "Hill number needs a positive total count");
  if (q == 1.0) {
    double h = 0.0;
    for (double n : c.counts) {
      if (n > 0.0) h -= (n / total) * std::log(n / total);
    }
    return std::exp(h);
  }
  double s = 0.0;
  for (double n : c.counts) {
    if (n > 0.0) s += std::pow(n / total, q);
  }
  return std::pow(s, 1.0 / (1.0 - q));
}

double cohens_d(std::span<const double> a, std::span<const double> b) {
  require_size(a, 2, "Cohen's d");
  require_size(b, 2, "Cohen's d");
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double pooled =
      std::sqrt(((na - 1.0) * stats::variance(a) + (nb - 1.0) * stats::variance(b)) / (na + nb - 2.0));
  if (!(pooled > 0.0)) throw Error(ErrorKind::insufficient_data, "Cohen's d undefined: pooled sd is zero");
  return (stats::mean(a) - stats::mean(b)) / pooled;
}

EmbeddingSet EmbeddingSet::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  EmbeddingSet e(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != e.d) throw Error(ErrorKind::invalid_argument, "embedding rows differ in length");
    std::copy(rows[i].begin(), rows[i].end(), e.data.begin() + static_cast<std::ptrdiff_t>(i * e.d));
  }
  return e;
}

EmbeddingSet EmbeddingSet::from_sample(std::span<const double> s) {
  EmbeddingSet e(s.size(), 1);
  std::copy(s.begin(), s.end(), e.data.begin());
  return e;
}

double median_pairwise_distance(const EmbeddingSet& pooled) {
  if (pooled.n < 2) throw Error(ErrorKind::insufficient_data, "median heuristic needs at least 2 points");
  const std::uint64_t n = pooled.n;
  const std::uint64_t pairs = n * (n - 1) / 2;
  const std::uint64_t lo_k = (pairs - 1) / 2, hi_k = pairs / 2;
  if (pooled.d == 1) {
    auto z = pooled.data;
    std::sort(z.begin(), z.end());
    const double lo = kth_pairwise_difference(z, lo_k);
    return lo_k == hi_k ? lo : 0.5 * (lo + kth_pairwise_difference(z, hi_k));
  }
  std::vector<double> dist;
  dist.reserve(pairs);
  for (std::size_t i = 0; i < pooled.n; ++i) {
    for (std::size_t j = i + 1; j < pooled.n; ++j) {
      double sq = 0.0;
      for (std::size_t c = 0; c < pooled.d; ++c) sq += (pooled.at(i, c) - pooled.at(j, c)) * (pooled.at(i, c) - pooled.at(j, c));
      dist.push_back(std::sqrt(sq));
    }
  }
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(hi_k), dist.end());
  const double hi = dist[hi_k];
  if (lo_k == hi_k) return hi;
  const double lo = *std::max_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(hi_k));
  return 0.5 * (lo + hi);
}

MmdResult mmd(const EmbeddingSet& a_in, const EmbeddingSet& b_in, const Kernel& kernel, const Subsample& sub) {
  check_embeddings(a_in, b_in);
  MmdResult out;
  EmbeddingSet a = a_in, b = b_in;
  if (sub.size) {
    if (*sub.size < 2) throw Error(ErrorKind::invalid_argument, "subsample size must be >= 2");
    std::mt19937_64 rng(sub.seed);
    a = subsample_rows(a_in, *sub.size, rng);
    b = subsample_rows(b_in, *sub.size, rng);
  }
  out.n_a = a.n;
  out.n_b = b.n;
  double bw = 0.0;
  if (kernel.kind == Kernel::Kind::rbf) {
    if (kernel.bandwidth) {
      if (!(*kernel.bandwidth > 0.0)) throw Error(ErrorKind::invalid_argument, "RBF bandwidth must be positive");
      bw = *kernel.bandwidth;
    } else {
      EmbeddingSet pooled(a.n + b.n, a.d);
      std::copy(a.data.begin(), a.data.end(), pooled.data.begin());
      std::copy(b.data.begin(), b.data.end(), pooled.data.begin() + static_cast<std::ptrdiff_t>(a.data.size()));
      if (pooled.d > 1 && pooled.n > 4000) {
        std::mt19937_64 rng(sub.seed ^ 0x9e3779b97f4a7c15ULL);
        pooled = subsample_rows(pooled, 4000, rng);
        out.warnings.push_back("parameter_choice: median heuristic computed on a 4000-point subsample");
      }
      bw = median_pairwise_distance(pooled);
      if (!(bw > 0.0)) {
        bw = 1.0;
        out.warnings.push_back("parameter_choice: median pairwise distance is 0; bandwidth falls back to 1.0");
      }
    }
    out.bandwidth = bw;
  } else if (kernel.degree < 1) {
    throw Error(ErrorKind::invalid_argument, "polynomial kernel degree must be >= 1");
  }
  const Points pa = compress(a), pb = compress(b);
  const double mmd2 = mean_kernel(pa, pa, kernel, bw) + mean_kernel(pb, pb, kernel, bw) -
                      2.0 * mean_kernel(pa, pb, kernel, bw);
  out.value = std::sqrt(std::max(0.0, mmd2));
  return out;
}

MmdResult mmd(std::span<const double> a, std::span<const double> b, const Kernel& kernel, const Subsample& sub) {
  return mmd(EmbeddingSet::from_sample(a), EmbeddingSet::from_sample(b), kernel, sub);
}

double energy_distance(std::span<const double> a_in, std::span<const double> b_in, const Subsample& sub) {
  require_size(a_in, 1, "energy distance");
  require_size(b_in, 1, "energy distance");
  std::vector<double> a(a_in.begin(), a_in.end()), b(b_in.begin(), b_in.end());
  if (sub.size) {
    std::mt19937_64 rng(sub.seed);
    a = subsample_values(a_in, *sub.size, rng);
    b = subsample_values(b_in, *sub.size, rng);
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double e = 2.0 * sum_abs_between(a, b) / (na * nb) - sum_abs_within(a) / (na * na) -
                   sum_abs_within(b) / (nb * nb);
  return std::max(0.0, e);
}

std::pair<CategoricalCounts, CategoricalCounts> binned_pair(std::span<const double> a, std::span<const double> b,
                                                            const Binning& binning) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::insufficient_data, "cannot bin an empty sample");
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  Warnings w;
  auto edges = bin_edges(pooled, binning, w);
  auto ha = histogram_with_edges(a, edges);
  auto hb = histogram_with_edges(b, edges);
  ha.warnings.insert(ha.warnings.begin(), w.begin(), w.end());
  return {std::move(ha), std::move(hb)};
}

DivergenceResult divergence(DivergenceKind kind, const CategoricalCounts& pc, const CategoricalCounts& qc,
                            const DivergenceOptions& opts) {
  pc.validate();
  qc.validate();
  if (pc.size() != qc.size() || (!pc.labels.empty() && !qc.labels.empty() && pc.labels != qc.labels))
    throw Error(ErrorKind::invalid_argument, "divergence inputs have mismatched categories or bins");
  if (pc.size() == 0) throw Error(ErrorKind::insufficient_data, "divergence needs at least one category");
  const double tp = pc.total(), tq = qc.total();
  if (!(tp > 0.0) || !(tq > 0.0)) throw Error(ErrorKind::insufficient_data, "divergence needs positive totals");

  std::vector<double> p(pc.size()), q(qc.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = pc.counts[i] / tp;
    q[i] = qc.counts[i] / tq;
  }
  DivergenceResult out;
  if (kind == DivergenceKind::js) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double m = 0.5 * (p[i] + q[i]);
      if (p[i] > 0.0) s += 0.5 * p[i] * std::log(p[i] / m);
      if (q[i] > 0.0) s += 0.5 * q[i] * std::log(q[i] / m);
    }
    out.value = std::clamp(s, 0.0, std::log(2.0));
    return out;
  }

  bool needs = false;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (kind == DivergenceKind::kl && p[i] > 0.0 && q[i] == 0.0) needs = true;
    if (kind == DivergenceKind::psi && (p[i] > 0.0) != (q[i] > 0.0)) needs = true;
  }
  if (needs) {
    if (opts.strict)
      throw Error(ErrorKind::insufficient_data, "zero probability in a denominator (strict mode, no smoothing)");
    if (!(opts.epsilon > 0.0)) throw Error(ErrorKind::invalid_argument, "smoothing epsilon must be positive");
    auto smooth = [&](std::vector<double>& v) {
      double t = 0.0;
      for (double& x : v) t += (x += opts.epsilon);
      for (double& x : v) x /= t;
    };
    smooth(p);
    smooth(q);
    out.smoothed = true;
    out.warnings.push_back("parameter_choice: empty bins smoothed with epsilon=" + std::to_string(opts.epsilon) +
                           " and renormalized");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (kind == DivergenceKind::kl) {
      if (p[i] > 0.0) s += p[i] * std::log(p[i] / q[i]);
    } else if (p[i] > 0.0 && q[i] > 0.0) {
      s += (p[i] - q[i]) * std::log(p[i] / q[i]);
    }
  }
  out.value = std::max(0.0, s);
  return out;
}

TestOutcome ks_test(std::span<const double> a_in, std::span<const double> b_in) {
  require_size(a_in, 1, "Kolmogorov-Smirnov test");
  require_size(b_in, 1, "Kolmogorov-Smirnov test");
  auto a = sorted_copy(a_in), b = sorted_copy(b_in);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  TestOutcome out;
  out.method = "asymptotic Kolmogorov";
  out.statistic = d;
  out.n_a = a.size();
  out.n_b = b.size();
  const double en = std::sqrt(na * nb / (na + nb));
  out.p_value = stats::kolmogorov_sf((en + 0.12 + 0.11 / en) * d);
  if (na * nb / (na + nb) < 4.0) out.warnings.push_back("small_sample_instability: asymptotic p-value for small samples");
  return out;
}

TestOutcome mann_whitney_u(std::span<const double> a, std::span<const double> b, std::size_t exact_limit) {
  require_size(a, 1, "Mann-Whitney U test");
  require_size(b, 1, "Mann-Whitney U test");
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto ranks = stats::average_ranks(pooled);
  const std::size_t n = a.size(), m = b.size(), big_n = n + m;
  double ra = 0.0;
  for (std::size_t i = 0; i < n; ++i) ra += ranks[i];
  const double u = ra - static_cast<double>(n) * (static_cast<double>(n) + 1.0) / 2.0;

  TestOutcome out;
  out.statistic = u;
  out.n_a = n;
  out.n_b = m;
  out.extra["u_b"] = static_cast<double>(n) * static_cast<double>(m) - u;

  if (n <= exact_limit && m <= exact_limit) {
    // Permutation distribution of the doubled rank sum of the first sample.
    std::vector<int> r2(big_n);
    int total = 0;
    for (std::size_t i = 0; i < big_n; ++i) total += (r2[i] = static_cast<int>(std::lround(2.0 * ranks[i])));
    std::vector<std::vector<double>> dp(n + 1, std::vector<double>(static_cast<std::size_t>(total) + 1, 0.0));
    dp[0][0] = 1.0;
    for (std::size_t e = 0; e < big_n; ++e) {
      for (std::size_t k = std::min(e + 1, n); k >= 1; --k) {
        for (int s = total; s >= r2[e]; --s) dp[k][s] += dp[k - 1][s - r2[e]];
      }
    }
    const int obs = static_cast<int>(std::lround(2.0 * ra));
    double le = 0.0, ge = 0.0, all = 0.0;
    for (int s = 0; s <= total; ++s) {
      all += dp[n][s];
      if (s <= obs) le += dp[n][s];
      if (s >= obs) ge += dp[n][s];
    }
    out.p_value = std::min(1.0, 2.0 * std::min(le, ge) / all);
    out.method = "exact";
    return out;
  }

  std::map<double, std::size_t> ties;
  for (double v : pooled) ++ties[v];
  double tie_sum = 0.0;
  for (const auto& [v, t] : ties) tie_sum += std::pow(static_cast<double>(t), 3) - static_cast<double>(t);
  const double nn = static_cast<double>(big_n);
  const double mu = static_cast<double>(n) * static_cast<double>(m) / 2.0;
  const double var = static_cast<double>(n) * static_cast<double>(m) / 12.0 * ((nn + 1.0) - tie_sum / (nn * (nn - 1.0)));
  out.method = "normal approximation";
  if (!(var > 0.0)) {
    out.p_value = 1.0;
    out.warnings.push_back("all values tied; p-value set to 1");
    return out;
  }
  const double z = std::max(0.0, std::abs(u - mu) - 0.5) / std::sqrt(var);
  out.p_value = std::min(1.0, 2.0 * stats::normal_sf(z));
  out.extra["z"] = z;
  return out;
}

TestOutcome anderson_darling(const std::vector<std::vector<double>>& samples) {
  const std::size_t k = samples.size();
  if (k < 2) throw Error(ErrorKind::invalid_argument, "Anderson-Darling k-sample test needs at least 2 samples");
  std::vector<double> z;
  std::vector<double> sizes;
  for (const auto& s : samples) {
    if (s.empty()) throw Error(ErrorKind::insufficient_data, "Anderson-Darling: every sample must be nonempty");
    z.insert(z.end(), s.begin(), s.end());
    sizes.push_back(static_cast<double>(s.size()));
  }
  std::sort(z.begin(), z.end());
  const double big_n = static_cast<double>(z.size());
  if (z.size() < 4) throw Error(ErrorKind::insufficient_data, "Anderson-Darling needs at least 4 observations");
  std::vector<double> zstar = z;
  zstar.erase(std::unique(zstar.begin(), zstar.end()), zstar.end());
  if (zstar.size() < 2)
    throw Error(ErrorKind::insufficient_data, "Anderson-Darling needs more than one distinct observation");

  std::vector<double> lj(zstar.size()), bj(zstar.size());
  for (std::size_t t = 0; t < zstar.size(); ++t) {
    const auto left = std::lower_bound(z.begin(), z.end(), zstar[t]) - z.begin();
    const auto right = std::upper_bound(z.begin(), z.end(), zstar[t]) - z.begin();
    lj[t] = static_cast<double>(right - left);
    bj[t] = static_cast<double>(left) + lj[t] / 2.0;
  }
  double a2kn = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    auto s = samples[i];
    std::sort(s.begin(), s.end());
    double inner = 0.0;
    for (std::size_t t = 0; t < zstar.size(); ++t) {
      const auto right = std::upper_bound(s.begin(), s.end(), zstar[t]) - s.begin();
      const auto left = std::lower_bound(s.begin(), s.end(), zstar[t]) - s.begin();
      const double mij = static_cast<double>(right) - static_cast<double>(right - left) / 2.0;
      const double num = big_n * mij - bj[t] * sizes[i];
      inner += lj[t] / big_n * num * num / (bj[t] * (big_n - bj[t]) - big_n * lj[t] / 4.0);
    }
    a2kn += inner / sizes[i];
  }
  a2kn *= (big_n - 1.0) / big_n;

  double hsum = 0.0;
  for (double s : sizes) hsum += 1.0 / s;
  // h = sum_{i<N} 1/i, g = sum_{i<N-1} sum_{j>i} 1/((N-i) j)
  std::vector<double> hs_cs;
  double acc = 0.0;
  for (double v = big_n - 1.0; v > 1.0; v -= 1.0) hs_cs.push_back(acc += 1.0 / v);
  const double h = hs_cs.back() + 1.0;
  double g = 0.0;
  for (std::size_t idx = 0; idx < hs_cs.size(); ++idx) g += hs_cs[idx] / static_cast<double>(idx + 2);
  const double kk = static_cast<double>(k);
  const double ca = (4 * g - 6) * (kk - 1) + (10 - 6 * g) * hsum;
  const double cb = (2 * g - 4) * kk * kk + 8 * h * kk + (2 * g - 14 * h - 4) * hsum - 8 * h + 4 * g - 6;
  const double cc = (6 * h + 2 * g - 2) * kk * kk + (4 * h - 4 * g + 6) * kk + (2 * h - 6) * hsum + 4 * h;
  const double cd = (2 * h + 6) * kk * kk - 4 * h * kk;
  const double sigmasq = (ca * std::pow(big_n, 3) + cb * big_n * big_n + cc * big_n + cd) /
                         ((big_n - 1.0) * (big_n - 2.0) * (big_n - 3.0));
  const double m = kk - 1.0;
  const double a2 = (a2kn - m) / std::sqrt(sigmasq);

  static constexpr double b0[] = {0.675, 1.281, 1.645, 1.96, 2.326, 2.573, 3.085};
  static constexpr double b1[] = {-0.245, 0.25, 0.678, 1.149, 1.822, 2.364, 3.615};
  static constexpr double b2[] = {-0.105, -0.305, -0.362, -0.396, -0.396, -0.345, -0.154};
  static constexpr double sig[] = {0.25, 0.1, 0.05, 0.025, 0.01, 0.005, 0.001};
  Eigen::Matrix<double, 7, 3> vand;
  Eigen::Matrix<double, 7, 1> logsig;
  double cmin = 1e300, cmax = -1e300;
  for (int i = 0; i < 7; ++i) {
    const double crit = b0[i] + b1[i] / std::sqrt(m) + b2[i] / m;
    cmin = std::min(cmin, crit);
    cmax = std::max(cmax, crit);
    vand(i, 0) = crit * crit;
    vand(i, 1) = crit;
    vand(i, 2) = 1.0;
    logsig(i) = std::log(sig[i]);
  }
  const Eigen::Vector3d coef = vand.colPivHouseholderQr().solve(logsig);
  double p = std::exp(coef(0) * a2 * a2 + coef(1) * a2 + coef(2));

  TestOutcome out;
  out.statistic = a2;
  out.method = "midrank k-sample, interpolated critical values";
  out.n_a = samples[0].size();
  out.n_b = samples[1].size();
  out.extra["a2akn"] = a2kn;
  if (a2 < cmin || p > 0.25) {
    p = 0.25;
    out.warnings.push_back("p-value capped at 0.25 (statistic below the tabulated range)");
  } else if (a2 > cmax || p < 0.001) {
    p = 0.001;
    out.warnings.push_back("p-value floored at 0.001 (statistic above the tabulated range)");
  }
  out.p_value = p;
  return out;
}

TestOutcome epps_singleton(std::span<const double> a, std::span<const double> b, std::vector<double> t) {
  require_size(a, 5, "Epps-Singleton test");
  require_size(b, 5, "Epps-Singleton test");
  if (t.empty()) throw Error(ErrorKind::invalid_argument, "Epps-Singleton needs at least one evaluation point");
  for (double v : t)
    if (!(v > 0.0)) throw Error(ErrorKind::invalid_argument, "Epps-Singleton evaluation points must be positive");
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const double sigma = (stats::quantile(pooled, 0.75) - stats::quantile(pooled, 0.25)) / 2.0;
  if (!(sigma > 0.0)) throw Error(ErrorKind::insufficient_data, "Epps-Singleton undefined: pooled IQR is zero");

  const std::size_t nt = t.size(), dim = 2 * nt;
  auto features = [&](std::span<const double> x) {
    Eigen::MatrixXd g(x.size(), dim);
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (std::size_t j = 0; j < nt; ++j) {
        g(i, j) = std::cos(t[j] / sigma * x[i]);
        g(i, nt + j) = std::sin(t[j] / sigma * x[i]);
      }
    }
    return g;
  };
  const Eigen::MatrixXd gx = features(a), gy = features(b);
  const double nx = static_cast<double>(a.size()), ny = static_cast<double>(b.size()), n = nx + ny;
  const Eigen::VectorXd mx = gx.colwise().mean(), my = gy.colwise().mean();
  const Eigen::MatrixXd cx = (gx.rowwise() - mx.transpose()).transpose() * (gx.rowwise() - mx.transpose()) / nx;
  const Eigen::MatrixXd cy = (gy.rowwise() - my.transpose()).transpose() * (gy.rowwise() - my.transpose()) / ny;
  const Eigen::MatrixXd est = (n / nx) * cx + (n / ny) * cy;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(est);
  const Eigen::VectorXd lam = es.eigenvalues();
  const double cutoff = 1e-15 * std::max(lam.cwiseAbs().maxCoeff(), 0.0);
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(lam.size());
  int rank = 0;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (std::abs(lam(i)) > cutoff && lam(i) != 0.0) {
      inv(i) = 1.0 / lam(i);
      ++rank;
    }
  }
  const Eigen::MatrixXd pinv = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
  const Eigen::VectorXd diff = mx - my;
  double w = n * diff.dot(pinv * diff);

  TestOutcome out;
  out.method = "Epps-Singleton, chi-squared asymptotic";
  out.n_a = a.size();
  out.n_b = b.size();
  if (rank < static_cast<int>(dim))
    out.warnings.push_back("estimated covariance matrix is rank deficient (rank " + std::to_string(rank) + ")");
  if (std::max(a.size(), b.size()) < 25) {
    w *= 1.0 / (1.0 + std::pow(n, -0.45) + 10.1 * (std::pow(nx, -1.7) + std::pow(ny, -1.7)));
    out.extra["small_sample_correction"] = 1.0;
  }
  if (std::min(a.size(), b.size()) < 25)
    out.warnings.push_back("small_sample_instability: asymptotic p-value unreliable below 25 observations per sample");
  out.statistic = w;
  out.extra["df"] = rank;
  if (rank > 0) {
    out.p_value = stats::chi2_sf(w, rank);
  } else {
    out.warnings.push_back("p-value unavailable: covariance has rank 0");
  }
  return out;
}

TestOutcome chi_squared(const CategoricalCounts& a, const CategoricalCounts& b) {
  a.validate();
  b.validate();
  if (a.size() != b.size() || (!a.labels.empty() && !b.labels.empty() && a.labels != b.labels))
    throw Error(ErrorKind::invalid_argument, "chi-squared inputs have mismatched categories");
  if (a.size() < 2) throw Error(ErrorKind::insufficient_data, "chi-squared test needs at least 2 categories");
  const double ta = a.total(), tb = b.total(), total = ta + tb;
  double stat = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double col = a.counts[i] + b.counts[i];
    const double ea = ta * col / total, eb = tb * col / total;
    if (!(ea > 0.0) || !(eb > 0.0)) {
      const std::string label = a.labels.empty() ? std::to_string(i) : a.labels[i];
      throw Error(ErrorKind::insufficient_data, "chi-squared undefined: expected count 0 for category '" + label + "'");
    }
    stat += (a.counts[i] - ea) * (a.counts[i] - ea) / ea + (b.counts[i] - eb) * (b.counts[i] - eb) / eb;
  }
  TestOutcome out;
  out.statistic = stat;
  out.method = "chi-squared homogeneity";
  out.n_a = static_cast<std::size_t>(ta);
  out.n_b = static_cast<std::size_t>(tb);
  const double df = static_cast<double>(a.size() - 1);
  out.extra["df"] = df;
  out.p_value = stats::chi2_sf(stat, df);
  return out;
}

double wasserstein_1d(std::span<const double> a_in, std::span<const double> b_in, double order) {
  if (!(order >= 1.0)) throw Error(ErrorKind::invalid_argument, "Wasserstein order must be >= 1");
  require_size(a_in, 1, "Wasserstein distance");
  require_size(b_in, 1, "Wasserstein distance");
  auto a = sorted_copy(a_in), b = sorted_copy(b_in);
  const std::size_t n = a.size(), m = b.size();
  // Integrate |F^-1(u) - G^-1(u)|^p over the merged quantile grid.
  std::size_t i = 0, j = 0;
  double u = 0.0, s = 0.0;
  while (i < n && j < m) {
    const std::uint64_t ci = (i + 1) * m, cj = (j + 1) * n;
    const double next = static_cast<double>(std::min(ci, cj)) / static_cast<double>(n * m);
    s += (next - u) * std::pow(std::abs(a[i] - b[j]), order);
    u = next;
    if (ci <= cj) ++i;
    if (cj <= ci) ++j;
  }
  return std::pow(s, 1.0 / order);
}

double frechet_distance(const EmbeddingSet& a, const EmbeddingSet& b, Warnings* warnings) {
  check_embeddings(a, b);
  if (warnings && (a.n <= a.d || b.n <= b.d))
    warnings->push_back("small_sample_instability: fewer rows than dimensions; covariance is singular");
  const Eigen::MatrixXd ma = to_matrix(a), mb = to_matrix(b);
  const Eigen::VectorXd mua = ma.colwise().mean(), mub = mb.colwise().mean();
  const Eigen::MatrixXd ca = (ma.rowwise() - mua.transpose()).transpose() * (ma.rowwise() - mua.transpose()) /
                             static_cast<double>(a.n - 1);
  const Eigen::MatrixXd cb = (mb.rowwise() - mub.transpose()).transpose() * (mb.rowwise() - mub.transpose()) /
                             static_cast<double>(b.n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ea(ca);
  const Eigen::VectorXd sqrt_la = ea.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd sqrt_a = ea.eigenvectors() * sqrt_la.asDiagonal() * ea.eigenvectors().transpose();
  Eigen::MatrixXd mid = sqrt_a * cb * sqrt_a;
  mid = 0.5 * (mid + mid.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> em(mid, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd lm = em.eigenvalues();
  const double scale = std::max(1.0, lm.cwiseAbs().maxCoeff());
  if (warnings && lm.minCoeff() < -1e-8 * scale)
    warnings->push_back("negative eigenvalues clipped in the covariance square root");
  const double tr_sqrt = lm.cwiseMax(0.0).cwiseSqrt().sum();
  const double value = (mua - mub).squaredNorm() + ca.trace() + cb.trace() - 2.0 * tr_sqrt;
  return std::max(0.0, value);
}

double kid(const EmbeddingSet& a_in, const EmbeddingSet& b_in, int degree, double coef, const Subsample& sub,
           Warnings* warnings) {
  if (warnings && (a_in.n < 50 || b_in.n < 50))
    warnings->push_back("small_sample_instability: KID estimate from fewer than 50 rows");
  check_embeddings(a_in, b_in);
  if (degree < 1) throw Error(ErrorKind::invalid_argument, "KID kernel degree must be >= 1");
  EmbeddingSet a = a_in, b = b_in;
  if (sub.size) {
    if (*sub.size < 2) throw Error(ErrorKind::invalid_argument, "subsample size must be >= 2");
    std::mt19937_64 rng(sub.seed);
    a = subsample_rows(a_in, *sub.size, rng);
    b = subsample_rows(b_in, *sub.size, rng);
  }
  const Kernel k = Kernel::polynomial(degree, coef);
  auto kv = [&](const EmbeddingSet& x, std::size_t i, const EmbeddingSet& y, std::size_t j) {
    return kernel_value(k, 0.0, x.row(i), y.row(j), x.d);
  };
  const double n = static_cast<double>(a.n), m = static_cast<double>(b.n);
  double kxx = 0.0, kyy = 0.0, kxy = 0.0;
  for (std::size_t i = 0; i < a.n; ++i)
    for (std::size_t j = i + 1; j < a.n; ++j) kxx += 2.0 * kv(a, i, a, j);
  for (std::size_t i = 0; i < b.n; ++i)
    for (std::size_t j = i + 1; j < b.n; ++j) kyy += 2.0 * kv(b, i, b, j);
  if (a.n == b.n) {
    // Equal sizes: U-statistic over paired indices, cross diagonal excluded.
    for (std::size_t i = 0; i < a.n; ++i)
      for (std::size_t j = 0; j < b.n; ++j)
        if (i != j) kxy += kv(a, i, b, j);
    return (kxx + kyy - 2.0 * kxy) / (n * (n - 1.0));
  }
  for (std::size_t i = 0; i < a.n; ++i)
    for (std::size_t j = 0; j < b.n; ++j) kxy += kv(a, i, b, j);
  return kxx / (n * (n - 1.0)) + kyy / (m * (m - 1.0)) - 2.0 * kxy / (n * m);
}

}  // namespace dqm
