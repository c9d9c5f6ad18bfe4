#include "dqm/structure_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "dqm/error.hpp"
#include "dqm/stats.hpp"

namespace dqm {

std::optional<double> syntactic_accuracy(const Column& column, const std::set<std::string>& dictionary) {
  if (dictionary.empty()) throw Error(ErrorKind::invalid_argument, "syntactic accuracy needs a nonempty dictionary");
  double present = 0.0, ok = 0.0;
  for (std::size_t i = 0; i < column.size(); ++i) {
    if (column.is_missing(i)) continue;
    present += 1.0;
    if (dictionary.count(column.text(i))) ok += 1.0;
  }
  if (present == 0.0) return std::nullopt;
  return ok / present;
}

namespace {

void run_detector(std::span<const double> x, double sign, const PageHinkleyParams& p, PageHinkleyResult& out) {
  double mean = 0.0, m = 0.0, m_min = 0.0, count = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const double v = sign * x[t];
    count += 1.0;
    mean += (v - mean) / count;
    m += v - mean - p.delta;
    m_min = std::min(m_min, m);
    const double stat = m - m_min;
    out.max_statistic = std::max(out.max_statistic, stat);
    if (stat >= p.lambda) {
      out.alarms.push_back(t);
      mean = m = m_min = count = 0.0;
    }
  }
}

double distance(const std::vector<double>& a, const std::vector<double>& b, ImbalanceDistance d) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    switch (d) {
      case ImbalanceDistance::total_variation: s += std::abs(a[i] - b[i]); break;
      case ImbalanceDistance::hellinger: s += std::pow(std::sqrt(a[i]) - std::sqrt(b[i]), 2); break;
      case ImbalanceDistance::euclidean: s += (a[i] - b[i]) * (a[i] - b[i]); break;
    }
  }
  switch (d) {
    case ImbalanceDistance::total_variation: return 0.5 * s;
    case ImbalanceDistance::hellinger: return std::sqrt(0.5 * s);
    case ImbalanceDistance::euclidean: return std::sqrt(s);
  }
  return s;
}

}  // namespace

PageHinkleyResult page_hinkley(std::span<const double> series, const PageHinkleyParams& p) {
  if (!(p.lambda > 0.0)) throw Error(ErrorKind::invalid_argument, "Page-Hinkley lambda must be positive");
  if (!(p.delta >= 0.0)) throw Error(ErrorKind::invalid_argument, "Page-Hinkley delta must be >= 0");
  if (series.size() < 2) throw Error(ErrorKind::insufficient_data, "Page-Hinkley needs at least 2 values");
  PageHinkleyResult out;
  using D = PageHinkleyParams::Direction;
  if (p.direction == D::increase || p.direction == D::both) run_detector(series, 1.0, p, out);
  if (p.direction == D::decrease || p.direction == D::both) run_detector(series, -1.0, p, out);
  std::sort(out.alarms.begin(), out.alarms.end());
  out.alarms.erase(std::unique(out.alarms.begin(), out.alarms.end()), out.alarms.end());
  return out;
}

std::size_t dataset_size(const Dataset& ds) { return ds.n_records(); }

std::size_t granularity(const Dataset& ds, const std::set<Role>& roles) {
  std::size_t n = 0;
  for (const auto& c : ds.columns()) n += roles.count(c.spec().role);
  return n;
}

std::vector<double> sampling_frequency(const Dataset& ds) {
  if (!ds.has_signals()) throw Error(ErrorKind::prerequisite, "dataset has no measurement signals");
  std::set<double> rates;
  for (const auto& b : ds.signals())
    if (b) rates.insert(b->sampling_hz);
  if (rates.empty()) throw Error(ErrorKind::prerequisite, "dataset has no measurement signals");
  return {rates.begin(), rates.end()};
}

ResolutionSummary resolution(const std::vector<std::pair<double, double>>& sizes) {
  if (sizes.empty()) throw Error(ErrorKind::insufficient_data, "resolution needs at least one image");
  std::vector<double> w, h;
  for (const auto& [a, b] : sizes) {
    if (!(a > 0.0) || !(b > 0.0)) throw Error(ErrorKind::invalid_argument, "image dimensions must be positive");
    w.push_back(a);
    h.push_back(b);
  }
  ResolutionSummary out;
  out.n = sizes.size();
  out.min_width = *std::min_element(w.begin(), w.end());
  out.min_height = *std::min_element(h.begin(), h.end());
  out.median_width = stats::quantile(w, 0.5);
  out.median_height = stats::quantile(h, 0.5);
  out.heterogeneous = std::any_of(sizes.begin(), sizes.end(), [&](const auto& s) { return s != sizes.front(); });
  return out;
}

std::size_t label_granularity(const std::map<std::string, std::string>& parent, const std::set<std::string>& labels) {
  std::set<std::string> all = labels;
  for (const auto& [child, par] : parent) {
    all.insert(child);
    all.insert(par);
  }
  if (all.empty()) throw Error(ErrorKind::insufficient_data, "label hierarchy is empty");
  std::map<std::string, std::size_t> depth;
  std::function<std::size_t(const std::string&, std::size_t)> resolve = [&](const std::string& label,
                                                                          std::size_t guard) -> std::size_t {
    if (guard > all.size()) throw Error(ErrorKind::invalid_argument, "label hierarchy contains a cycle");
    if (auto it = depth.find(label); it != depth.end()) return it->second;
    auto p = parent.find(label);
    const std::size_t d = (p == parent.end() || p->second.empty()) ? 1 : resolve(p->second, guard + 1) + 1;
    depth[label] = d;
    return d;
  };
  std::size_t best = 0;
  for (const auto& l : all) best = std::max(best, resolve(l, 0));
  return best;
}

double imbalance_ratio(const CategoricalCounts& c, Warnings* warnings) {
  c.validate();
  if (c.size() == 0) throw Error(ErrorKind::insufficient_data, "imbalance ratio needs at least one class");
  const double mx = *std::max_element(c.counts.begin(), c.counts.end());
  const double mn = *std::min_element(c.counts.begin(), c.counts.end());
  if (!(mx > 0.0)) throw Error(ErrorKind::insufficient_data, "imbalance ratio needs a positive count");
  if (mn == 0.0) {
    if (warnings) warnings->push_back("imbalance_instability: a declared class is empty; ratio is infinite");
    return std::numeric_limits<double>::infinity();
  }
  return mx / mn;
}

double imbalance_degree(const CategoricalCounts& c, ImbalanceDistance dist) {
  c.validate();
  const std::size_t k = c.size();
  if (k < 2) throw Error(ErrorKind::insufficient_data, "imbalance degree needs at least 2 classes");
  const double total = c.total();
  if (!(total > 0.0)) throw Error(ErrorKind::insufficient_data, "imbalance degree needs a positive total");
  const double kk = static_cast<double>(k);
  std::vector<double> p(k), u(k, 1.0 / kk);
  std::size_t m = 0;
  for (std::size_t i = 0; i < k; ++i) {
    p[i] = c.counts[i] / total;
    // Exact comparison against 1/K in counts to avoid rounding.
    if (c.counts[i] * kk < total) ++m;
  }
  if (m == 0) return 0.0;
  std::vector<double> iota(k, 0.0);
  for (std::size_t i = m; i + 1 < k; ++i) iota[i] = 1.0 / kk;
  iota[k - 1] = 1.0 - static_cast<double>(k - m - 1) / kk;
  return distance(p, u, dist) / distance(iota, u, dist) + static_cast<double>(m - 1);
}

double lrid(const CategoricalCounts& c) {
  c.validate();
  if (c.size() < 2) throw Error(ErrorKind::insufficient_data, "LRID needs at least 2 classes");
  const double total = c.total(), k = static_cast<double>(c.size());
  if (!(total > 0.0)) throw Error(ErrorKind::insufficient_data, "LRID needs a positive total");
  double s = 0.0;
  for (double n : c.counts)
    if (n > 0.0) s += n * std::log(n * k / total);
  return std::max(0.0, 2.0 * s);
}

double currency(double age, const CurrencyParams& p) {
  if (!(age >= 0.0)) throw Error(ErrorKind::invalid_argument, "currency: negative age (timestamp after evaluation time)");
  using V = CurrencyParams::Variant;
  switch (p.variant) {
    case V::ballou:
      if (!(p.volatility > 0.0) || !(p.exponent > 0.0))
        throw Error(ErrorKind::invalid_argument, "Ballou currency needs positive volatility and exponent");
      return std::pow(std::max(0.0, 1.0 - age / p.volatility), p.exponent);
    case V::li:
      if (!(p.shelf_life > 0.0)) throw Error(ErrorKind::invalid_argument, "Li currency needs a positive shelf life");
      return std::max(0.0, 1.0 - age / p.shelf_life);
    case V::hinrichs:
      if (!(p.update_rate > 0.0))
        throw Error(ErrorKind::invalid_argument, "Hinrichs currency needs a positive update rate");
      return 1.0 / (p.update_rate * age + 1.0);
    case V::heinrich:
      if (!(p.decline >= 0.0)) throw Error(ErrorKind::invalid_argument, "Heinrich decline must be >= 0");
      return std::exp(-p.decline * age);
  }
  return 0.0;
}

DuplicateSummary prevalence_of_duplicates(const Dataset& ds, const std::vector<std::string>& keys) {
  std::vector<const Column*> cols;
  if (keys.empty()) {
    for (const auto& c : ds.columns()) cols.push_back(&c);
  } else {
    for (const auto& k : keys) cols.push_back(&ds.column(k));
  }
  std::set<std::vector<std::string>> seen;
  for (std::size_t i = 0; i < ds.n_records(); ++i) {
    std::vector<std::string> key;
    key.reserve(cols.size());
    // Missing cells compare equal to each other and to no value.
    for (const Column* c : cols) key.push_back(c->is_missing(i) ? std::string("\x01") : "=" + c->text(i));
    seen.insert(std::move(key));
  }
  DuplicateSummary out;
  out.count = ds.n_records() - seen.size();
  out.ratio = ds.n_records() == 0 ? 0.0 : static_cast<double>(out.count) / static_cast<double>(ds.n_records());
  return out;
}

double effective_sample_size(std::span<const double> weights) {
  double s = 0.0, s2 = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw Error(ErrorKind::invalid_argument, "weights must be nonnegative");
    s += w;
    s2 += w * w;
  }
  if (!(s > 0.0)) throw Error(ErrorKind::invalid_argument, "effective sample size undefined: all weights zero");
  return s * s / s2;
}

double effective_sample_size_clustered(double n, double cluster_size, double icc) {
  if (!(n > 0.0) || !(cluster_size >= 1.0)) throw Error(ErrorKind::invalid_argument, "need n > 0 and cluster size >= 1");
  if (!(icc >= 0.0 && icc <= 1.0)) throw Error(ErrorKind::invalid_argument, "ICC must lie in [0, 1]");
  return n / (1.0 + (cluster_size - 1.0) * icc);
}

}  // namespace dqm
