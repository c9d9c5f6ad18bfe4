#include "dqm/measurement_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "dqm/error.hpp"
#include "dqm/stats.hpp"

namespace dqm {

namespace {

// Distinct codes used anywhere in the matrix, sorted.
std::vector<double> used_codes(const RatingsMatrix& m) {
  std::set<double> s;
  for (const auto& c : m.cells)
    if (c) s.insert(*c);
  return {s.begin(), s.end()};
}

std::size_t code_index(const std::vector<double>& codes, double v) {
  return static_cast<std::size_t>(std::lower_bound(codes.begin(), codes.end(), v) - codes.begin());
}

std::vector<double> category_axis(const RatingsMatrix& m) {
  auto used = used_codes(m);
  if (m.labels.empty()) return used;
  std::vector<double> all(m.labels.size());
  std::iota(all.begin(), all.end(), 0.0);
  for (double v : used) {
    if (v < 0 || v >= static_cast<double>(all.size()) || v != std::floor(v))
      throw Error(ErrorKind::invalid_argument, "rating code outside the label set");
  }
  return all;
}

}  // namespace

double shannon_entropy(const CategoricalCounts& c, double base) {
  c.validate();
  if (!(base > 0.0) || base == 1.0) throw Error(ErrorKind::invalid_argument, "entropy base must be positive and != 1");
  const double total = c.total();
  if (!(total > 0.0)) throw Error(ErrorKind::insufficient_data, "entropy needs a positive total count");
  double h = 0.0;
  for (double n : c.counts) {
    if (n > 0.0) h -= (n / total) * std::log(n / total);
  }
  return std::max(0.0, h) / std::log(base);
}

SampleEntropyResult sample_entropy(std::span<const double> x, const SampleEntropyParams& p) {
  if (p.m < 1) throw Error(ErrorKind::invalid_argument, "sample entropy embedding length m must be >= 1");
  if (!(p.r > 0.0)) throw Error(ErrorKind::invalid_argument, "sample entropy tolerance r must be positive");
  const std::size_t m = static_cast<std::size_t>(p.m);
  if (x.size() < m + 2)
    throw Error(ErrorKind::insufficient_data, "sample entropy needs at least m + 2 = " + std::to_string(m + 2) +
                                                  " values, got " + std::to_string(x.size()));
  SampleEntropyResult out;
  const double sd = stats::sd(x, 0);
  if (!(sd > 0.0)) {
    out.value = 0.0;
    out.warnings.push_back("constant series: sample entropy set to 0");
    return out;
  }
  const double r = p.r * sd;
  out.tolerance = r;
  const std::size_t nt = x.size() - m;  // templates for both lengths
  std::vector<std::size_t> order(nt);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  double a = 0.0, b = 0.0;
  for (std::size_t oi = 0; oi < nt; ++oi) {
    const std::size_t i = order[oi];
    for (std::size_t oj = oi + 1; oj < nt && x[order[oj]] - x[i] <= r; ++oj) {
      const std::size_t j = order[oj];
      bool match = true;
      for (std::size_t k = 1; k < m && match; ++k) match = std::abs(x[i + k] - x[j + k]) <= r;
      if (!match) continue;
      b += 1.0;
      if (std::abs(x[i + m] - x[j + m]) <= r) a += 1.0;
    }
  }
  out.a = a;
  out.b = b;
  if (a == 0.0 || b == 0.0) {
    out.warnings.push_back("small_sample_instability: sample entropy undefined, insufficient template matches");
    return out;
  }
  out.value = -std::log(a / b);
  return out;
}

LodLoq lod_loq(std::span<const double> blanks, double lod_k, double loq_k, Warnings* warnings) {
  if (blanks.size() < 3) throw Error(ErrorKind::insufficient_data, "LoD/LoQ need at least 3 blank measurements");
  if (!(lod_k > 0.0) || !(loq_k >= lod_k))
    throw Error(ErrorKind::invalid_argument, "LoD/LoQ multipliers must satisfy 0 < lod_k <= loq_k");
  LodLoq out;
  out.mean = stats::mean(blanks);
  out.sd = stats::sd(blanks, 1);
  if (out.sd == 0.0 && warnings) warnings->push_back("blank measurements have zero sd; LoD = LoQ = mean");
  out.lod = out.mean + lod_k * out.sd;
  out.loq = out.mean + loq_k * out.sd;
  return out;
}

double bland_altman_cr(std::span<const double> first, std::span<const double> second) {
  if (first.size() != second.size()) throw Error(ErrorKind::invalid_argument, "paired series differ in length");
  if (first.size() < 2) throw Error(ErrorKind::insufficient_data, "Bland-Altman needs at least 2 pairs");
  std::vector<double> d(first.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = first[i] - second[i];
  return 1.96 * stats::sd(d, 1);
}

double repeatability_cv(const RepeatedMeasures& rm, Warnings* warnings) {
  double var_sum = 0.0, value_sum = 0.0, value_n = 0.0;
  std::size_t used = 0, skipped = 0;
  for (const auto& s : rm.subjects) {
    if (s.values.size() < 2) {
      ++skipped;
      continue;
    }
    var_sum += stats::variance(s.values, 1);
    value_sum += std::accumulate(s.values.begin(), s.values.end(), 0.0);
    value_n += static_cast<double>(s.values.size());
    ++used;
  }
  if (used == 0) throw Error(ErrorKind::prerequisite, "repeatability CV needs a subject with at least 2 repeats");
  if (skipped > 0 && warnings)
    warnings->push_back(std::to_string(skipped) + " subject(s) with a single measurement skipped");
  const double grand = value_sum / value_n;
  if (!(grand > 0.0)) throw Error(ErrorKind::applicability, "repeatability CV needs a positive grand mean");
  return std::sqrt(var_sum / static_cast<double>(used)) / grand;
}

ReproducibilityComponents reproducibility_variance(std::span<const double> values,
                                                   const std::vector<std::string>& conditions, Warnings* warnings) {
  if (values.size() != conditions.size())
    throw Error(ErrorKind::invalid_argument, "values and condition labels differ in length");
  std::map<std::string, std::vector<double>> groups;
  for (std::size_t i = 0; i < values.size(); ++i) groups[conditions[i]].push_back(values[i]);
  if (groups.size() < 2) throw Error(ErrorKind::prerequisite, "reproducibility needs at least 2 conditions");
  double total_n = 0.0, sum_sq_n = 0.0, ss_within = 0.0, ss_between = 0.0;
  const double grand = stats::mean(values);
  ReproducibilityComponents out;
  const std::size_t first_size = groups.begin()->second.size();
  for (const auto& [label, g] : groups) {
    if (g.size() < 2)
      throw Error(ErrorKind::insufficient_data, "condition '" + label + "' has fewer than 2 repeats");
    if (g.size() != first_size) out.balanced = false;
    const double gm = stats::mean(g), n = static_cast<double>(g.size());
    for (double v : g) ss_within += (v - gm) * (v - gm);
    ss_between += n * (gm - grand) * (gm - grand);
    total_n += n;
    sum_sq_n += n * n;
  }
  const double p = static_cast<double>(groups.size());
  const double ms_within = ss_within / (total_n - p);
  const double ms_between = ss_between / (p - 1.0);
  out.n_bar = (total_n - sum_sq_n / total_n) / (p - 1.0);
  if (!out.balanced && warnings)
    warnings->push_back("unbalanced design: between-condition variance uses the effective group size n_bar");
  out.repeatability = ms_within;
  out.between = std::max(0.0, (ms_between - ms_within) / out.n_bar);
  out.reproducibility = out.repeatability + out.between;
  return out;
}

InstrumentError instrument_error(std::span<const double> measured, std::span<const double> reference) {
  if (measured.size() != reference.size())
    throw Error(ErrorKind::invalid_argument, "measured and reference series differ in length");
  if (measured.size() < 2) throw Error(ErrorKind::insufficient_data, "instrument error needs at least 2 pairs");
  std::vector<double> d(measured.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = measured[i] - reference[i];
  return {stats::mean(d), stats::sd(d, 1)};
}

double cohens_kappa(const RatingsMatrix& m, KappaWeights weights, Warnings* warnings) {
  if (m.raters != 2)
    throw Error(ErrorKind::prerequisite, "Cohen's kappa needs exactly 2 raters, got " + std::to_string(m.raters));
  const auto codes = category_axis(m);
  const std::size_t k = codes.size();
  std::vector<std::vector<double>> table(k, std::vector<double>(k, 0.0));
  double n = 0.0;
  std::size_t dropped = 0;
  for (std::size_t i = 0; i < m.items; ++i) {
    if (!m.at(i, 0) || !m.at(i, 1)) {
      ++dropped;
      continue;
    }
    table[code_index(codes, *m.at(i, 0))][code_index(codes, *m.at(i, 1))] += 1.0;
    n += 1.0;
  }
  if (dropped > 0 && warnings) warnings->push_back(std::to_string(dropped) + " item(s) without both ratings dropped");
  if (!(n > 0.0)) throw Error(ErrorKind::insufficient_data, "Cohen's kappa: no item rated by both raters");
  std::vector<double> rows(k, 0.0), cols(k, 0.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      rows[i] += table[i][j] / n;
      cols[j] += table[i][j] / n;
    }
  auto w = [&](std::size_t i, std::size_t j) {
    if (weights == KappaWeights::none) return i == j ? 0.0 : 1.0;
    const double d = std::abs(static_cast<double>(i) - static_cast<double>(j)) / static_cast<double>(k - 1);
    return weights == KappaWeights::linear ? d : d * d;
  };
  double observed = 0.0, expected = 0.0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      observed += w(i, j) * table[i][j] / n;
      expected += w(i, j) * rows[i] * cols[j];
    }
  if (!(expected > 0.0))
    throw Error(ErrorKind::insufficient_data, "Cohen's kappa undefined: chance agreement is 1");
  return 1.0 - observed / expected;
}

double fleiss_kappa(const RatingsMatrix& m) {
  if (m.raters < 2) throw Error(ErrorKind::prerequisite, "Fleiss' kappa needs at least 2 raters");
  const auto codes = category_axis(m);
  const std::size_t k = codes.size();
  std::optional<std::size_t> per_item;
  std::vector<double> cat_tot(k, 0.0);
  double p_bar = 0.0;
  for (std::size_t i = 0; i < m.items; ++i) {
    std::vector<double> nij(k, 0.0);
    std::size_t ni = 0;
    for (std::size_t r = 0; r < m.raters; ++r) {
      if (m.at(i, r)) {
        nij[code_index(codes, *m.at(i, r))] += 1.0;
        ++ni;
      }
    }
    if (!per_item) per_item = ni;
    if (ni != *per_item)
      throw Error(ErrorKind::invalid_argument, "Fleiss' kappa needs the same number of ratings for every item");
    double sq = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      sq += nij[j] * nij[j];
      cat_tot[j] += nij[j];
    }
    const double nn = static_cast<double>(ni);
    p_bar += (sq - nn) / (nn * (nn - 1.0));
  }
  if (!per_item || *per_item < 2)
    throw Error(ErrorKind::prerequisite, "Fleiss' kappa needs at least 2 ratings per item");
  const double items = static_cast<double>(m.items);
  p_bar /= items;
  double p_e = 0.0;
  for (double t : cat_tot) {
    const double pj = t / (items * static_cast<double>(*per_item));
    p_e += pj * pj;
  }
  if (!(p_e < 1.0)) throw Error(ErrorKind::insufficient_data, "Fleiss' kappa undefined: a single category used");
  return (p_bar - p_e) / (1.0 - p_e);
}

double kendalls_w(const RatingsMatrix& m) {
  if (m.raters < 2) throw Error(ErrorKind::prerequisite, "Kendall's W needs at least 2 raters");
  if (m.items < 2) throw Error(ErrorKind::insufficient_data, "Kendall's W needs at least 2 items");
  const double n = static_cast<double>(m.items), k = static_cast<double>(m.raters);
  std::vector<double> rank_sum(m.items, 0.0);
  double ties = 0.0;
  for (std::size_t r = 0; r < m.raters; ++r) {
    std::vector<double> scores(m.items);
    for (std::size_t i = 0; i < m.items; ++i) {
      if (!m.at(i, r)) throw Error(ErrorKind::invalid_argument, "Kendall's W: every rater must rank every item");
      scores[i] = *m.at(i, r);
    }
    const auto ranks = stats::average_ranks(scores);
    for (std::size_t i = 0; i < m.items; ++i) rank_sum[i] += ranks[i];
    std::map<double, double> groups;
    for (double s : scores) groups[s] += 1.0;
    for (const auto& [v, t] : groups) ties += t * t * t - t;
  }
  const double mean_r = k * (n + 1.0) / 2.0;
  double s = 0.0;
  for (double rs : rank_sum) s += (rs - mean_r) * (rs - mean_r);
  const double denom = k * k * (n * n * n - n) - k * ties;
  if (!(denom > 0.0)) throw Error(ErrorKind::insufficient_data, "Kendall's W undefined: all items tied for every rater");
  return 12.0 * s / denom;
}

double krippendorff_alpha(const RatingsMatrix& m, AlphaLevel level) {
  const auto values = used_codes(m);
  const std::size_t v = values.size();
  std::vector<std::vector<double>> o(v, std::vector<double>(v, 0.0));
  bool any = false;
  for (std::size_t i = 0; i < m.items; ++i) {
    std::vector<std::size_t> unit;
    for (std::size_t r = 0; r < m.raters; ++r)
      if (m.at(i, r)) unit.push_back(code_index(values, *m.at(i, r)));
    if (unit.size() < 2) continue;
    any = true;
    const double w = 1.0 / static_cast<double>(unit.size() - 1);
    for (std::size_t a = 0; a < unit.size(); ++a)
      for (std::size_t b = 0; b < unit.size(); ++b)
        if (a != b) o[unit[a]][unit[b]] += w;
  }
  if (!any) throw Error(ErrorKind::insufficient_data, "Krippendorff's alpha: no item has 2 or more ratings");
  std::vector<double> nc(v, 0.0);
  double n = 0.0;
  for (std::size_t c = 0; c < v; ++c) {
    for (std::size_t k = 0; k < v; ++k) nc[c] += o[c][k];
    n += nc[c];
  }
  auto delta2 = [&](std::size_t c, std::size_t k) -> double {
    if (c == k) return 0.0;
    switch (level) {
      case AlphaLevel::nominal:
        return 1.0;
      case AlphaLevel::interval:
        return (values[c] - values[k]) * (values[c] - values[k]);
      case AlphaLevel::ratio: {
        const double s = values[c] + values[k];
        return s == 0.0 ? 0.0 : std::pow((values[c] - values[k]) / s, 2);
      }
      case AlphaLevel::ordinal: {
        const std::size_t lo = std::min(c, k), hi = std::max(c, k);
        double s = 0.0;
        for (std::size_t g = lo; g <= hi; ++g) s += nc[g];
        s -= (nc[lo] + nc[hi]) / 2.0;
        return s * s;
      }
    }
    return 1.0;
  };
  double d_o = 0.0, d_e = 0.0;
  for (std::size_t c = 0; c < v; ++c)
    for (std::size_t k = 0; k < v; ++k) {
      const double d = delta2(c, k);
      d_o += o[c][k] * d;
      d_e += nc[c] * nc[k] * d;
    }
  if (!(d_e > 0.0)) throw Error(ErrorKind::insufficient_data, "Krippendorff's alpha undefined: no variation in values");
  return 1.0 - (n - 1.0) * d_o / d_e;
}

double overlap(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b, OverlapKind kind,
               Warnings* warnings) {
  if (a.size() != b.size()) throw Error(ErrorKind::invalid_argument, "masks have different domains");
  double inter = 0.0, sa = 0.0, sb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool x = a[i] != 0, y = b[i] != 0;
    sa += x;
    sb += y;
    inter += x && y;
  }
  if (sa + sb == 0.0) {
    if (warnings) warnings->push_back("both masks empty: overlap set to 1 by convention");
    return 1.0;
  }
  if (kind == OverlapKind::dice) return 2.0 * inter / (sa + sb);
  return inter / (sa + sb - inter);
}

double completeness(const Dataset& ds, const std::vector<std::string>& columns) {
  std::vector<const Column*> cols;
  if (columns.empty()) {
    for (const auto& c : ds.columns()) cols.push_back(&c);
  } else {
    for (const auto& name : columns) cols.push_back(&ds.column(name));
  }
  const double cells = static_cast<double>(cols.size()) * static_cast<double>(ds.n_records());
  if (!(cells > 0.0)) throw Error(ErrorKind::insufficient_data, "completeness: empty scope");
  double missing = 0.0;
  for (const Column* c : cols) missing += static_cast<double>(c->missing_count());
  return (cells - missing) / cells;
}

double measurement_completeness(const Dataset& ds) {
  if (!ds.has_signals()) throw Error(ErrorKind::prerequisite, "dataset has no measurement signals");
  if (ds.n_records() == 0) throw Error(ErrorKind::insufficient_data, "completeness: empty scope");
  double s = 0.0;
  for (const auto& block : ds.signals()) {
    if (!block || block->n_samples() == 0 || block->n_channels() == 0) continue;
    double finite = 0.0, total = 0.0;
    for (const auto& ch : block->samples) {
      for (double v : ch) finite += std::isfinite(v) ? 1.0 : 0.0;
      total += static_cast<double>(ch.size());
    }
    s += finite / total;
  }
  return s / static_cast<double>(ds.n_records());
}

double patient_level_completeness(const Dataset& ds, const std::string& variable) {
  const Column* pid = ds.column_with_role(Role::patient_id);
  if (!pid) throw Error(ErrorKind::prerequisite, "patient-level completeness needs a patient_id column");
  const Column* var = nullptr;
  const bool signals = variable == "measurements";
  if (signals) {
    if (!ds.has_signals()) throw Error(ErrorKind::prerequisite, "dataset has no measurement signals");
  } else {
    var = &ds.column(variable);
  }
  std::map<std::string, bool> patients;
  for (std::size_t i = 0; i < ds.n_records(); ++i) {
    if (pid->is_missing(i)) continue;
    bool present = false;
    if (signals) {
      const auto& block = ds.signals()[i];
      if (block) {
        for (const auto& ch : block->samples)
          for (double v : ch)
            if (std::isfinite(v)) {
              present = true;
              break;
            }
      }
    } else {
      present = !var->is_missing(i);
    }
    patients[pid->text(i)] = patients[pid->text(i)] || present;
  }
  if (patients.empty()) throw Error(ErrorKind::insufficient_data, "no patients with a patient id");
  double complete = 0.0;
  for (const auto& [id, ok] : patients) complete += ok ? 1.0 : 0.0;
  return complete / static_cast<double>(patients.size());
}

double record_completeness(const Dataset& ds, const std::vector<std::string>& required, Warnings* warnings) {
  std::vector<const Column*> cols;
  for (const auto& name : required) cols.push_back(&ds.column(name));
  if (cols.empty()) {
    if (warnings) warnings->push_back("no required columns: record completeness is vacuously 1");
    return 1.0;
  }
  if (ds.n_records() == 0) throw Error(ErrorKind::insufficient_data, "record completeness: no records");
  double complete = 0.0;
  for (std::size_t i = 0; i < ds.n_records(); ++i) {
    bool ok = true;
    for (const Column* c : cols) ok = ok && !c->is_missing(i);
    complete += ok ? 1.0 : 0.0;
  }
  return complete / static_cast<double>(ds.n_records());
}

}  // namespace dqm
