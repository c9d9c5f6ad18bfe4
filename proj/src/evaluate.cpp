#include "dqm/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <thread>

#include "dqm/corr_metrics.hpp"
#include "dqm/dist_metrics.hpp"
#include "dqm/error.hpp"
#include "dqm/measurement_metrics.hpp"
#include "dqm/registry.hpp"
#include "dqm/structure_metrics.hpp"

namespace dqm {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kDefaults = R"JSON({
  "entropy": {"source": null, "column": null, "m": 2, "r": 0.2, "base": 2.718281828459045, "max_records": null},
  "limit_of_detection": {"column": null, "lod_k": 3.3},
  "limit_of_quantification": {"column": null, "loq_k": 10.0},
  "systematic_error": {"column": null, "reference": null},
  "random_error": {"column": null, "reference": null},
  "bland_altman_cr": {"first": null, "second": null},
  "repeatability_cv": {"column": null, "subject": null},
  "reproducibility_variance": {"column": null, "condition": null},
  "cohens_kappa": {"columns": null, "weights": "none"},
  "fleiss_kappa": {"columns": null},
  "kendalls_w": {"columns": null},
  "krippendorff_alpha": {"columns": null, "level": "nominal"},
  "dice": {"first": null, "second": null},
  "iou": {"first": null, "second": null},
  "completeness": {"source": "table", "columns": []},
  "patient_level_completeness": {"variable": null},
  "record_completeness": {"required": []},
  "syntactic_accuracy": {"column": null, "dictionary": null},
  "page_hinkley": {"column": null, "delta": 0.005, "lambda": 50.0, "direction": "both"},
  "dataset_size": {},
  "granularity": {"source": "table", "roles": ["feature", "patient_id", "timestamp"]},
  "sampling_frequency": {"source": "signals"},
  "resolution": {"width": null, "height": null},
  "label_granularity": {"hierarchy": null, "column": null},
  "generalized_imbalance_ratio": {"column": null},
  "imbalance_degree": {"column": null, "distance": "total_variation"},
  "lrid": {"column": null},
  "currency_ballou": {"timestamp": null, "evaluation_time": null, "volatility": null, "exponent": 1.0},
  "currency_li": {"timestamp": null, "evaluation_time": null, "shelf_life": null},
  "currency_hinrichs": {"timestamp": null, "evaluation_time": null, "update_rate": null},
  "currency_heinrich": {"timestamp": null, "evaluation_time": null, "decline": 1e-9},
  "prevalence_of_duplicates": {"keys": []},
  "effective_sample_size": {"weights": null, "cluster_size": null, "icc": null},
  "littles_test": {"columns": null, "tol": 1e-6, "max_iter": 200},
  "informative_dropout": {},
  "range": {"column": null},
  "interquartile_range": {"column": null},
  "mean_std": {"column": null},
  "hill_number": {"column": null, "q": 2.0},
  "mmd": {"column": null, "group_by": null, "groups": null, "kernel": "rbf", "bandwidth": null, "degree": 3, "coef": 1.0, "subsample": null},
  "cohens_d": {"column": null, "group_by": null, "groups": null},
  "energy_distance": {"column": null, "group_by": null, "groups": null, "subsample": null},
  "kl_divergence": {"column": null, "group_by": null, "groups": null, "binning": "equal_width", "bins": 10, "strict": false, "epsilon": 1e-6},
  "psi": {"column": null, "group_by": null, "groups": null, "binning": "equal_width", "bins": 10, "strict": false, "epsilon": 1e-6},
  "js_divergence": {"column": null, "group_by": null, "groups": null, "binning": "equal_width", "bins": 10},
  "ks_test": {"column": null, "group_by": null, "groups": null},
  "epps_singleton": {"column": null, "group_by": null, "groups": null, "t": [0.4, 0.8]},
  "anderson_darling": {"column": null, "group_by": null, "groups": null},
  "chi_squared": {"column": null, "group_by": null, "groups": null},
  "fid": {"columns": null, "group_by": null, "groups": null},
  "kid": {"columns": null, "group_by": null, "groups": null, "degree": 3, "coef": 1.0, "subsample": null},
  "mann_whitney_u": {"column": null, "group_by": null, "groups": null, "exact_limit": 8},
  "wasserstein": {"column": null, "group_by": null, "groups": null, "order": 1.0},
  "pearson": {"column": null, "target": null, "target_positive": null},
  "ccc": {"column": null, "target": null, "target_positive": null},
  "goodman_kruskal_gamma": {"column": null, "target": null, "target_positive": null},
  "kendall_tau": {"column": null, "target": null, "target_positive": null},
  "spearman": {"column": null, "target": null, "target_positive": null},
  "icc": {"columns": null},
  "cramers_v": {"column": null, "target": null}
})JSON";

const json& defaults_table() {
  static const json table = json::parse(kDefaults);
  return table;
}

struct Ctx {
  const Dataset& ds;
  const MetricCard& card;
  json p;
  std::uint64_t seed;
  MetricResult& r;

  [[noreturn]] void fail(ErrorKind kind, const std::string& msg) const {
    throw Error(kind, card.id + ": " + msg);
  }

  bool has(const char* key) const { return p.contains(key) && !p.at(key).is_null(); }

  std::optional<std::string> str(const char* key) const {
    if (!has(key)) return std::nullopt;
    if (!p.at(key).is_string()) fail(ErrorKind::invalid_argument, std::string("parameter '") + key + "' must be a string");
    return p.at(key).get<std::string>();
  }

  double num(const char* key) const {
    if (!has(key) || !p.at(key).is_number())
      fail(ErrorKind::invalid_argument, std::string("parameter '") + key + "' must be a number");
    return p.at(key).get<double>();
  }

  std::vector<std::string> strings(const char* key) const {
    std::vector<std::string> out;
    if (!has(key)) return out;
    const auto& v = p.at(key);
    if (v.is_string()) return {v.get<std::string>()};
    if (!v.is_array()) fail(ErrorKind::invalid_argument, std::string("parameter '") + key + "' must be a list");
    for (const auto& x : v) out.push_back(x.get<std::string>());
    return out;
  }

  void warn(std::string w) {
    if (std::find(r.warnings.begin(), r.warnings.end(), w) == r.warnings.end()) r.warnings.push_back(std::move(w));
  }
  void warn_all(const Warnings& ws) {
    for (const auto& w : ws) warn(w);
  }

  /// Column named by `key`, falling back to the column carrying `role`.
  const Column& column(const char* key, std::optional<Role> role = std::nullopt, const char* what = "a column") {
    if (auto name = str(key)) return ds.column(*name);
    if (role) {
      if (const Column* c = ds.column_with_role(*role)) {
        p[key] = c->name();
        return *c;
      }
      fail(ErrorKind::prerequisite, std::string("parameter '") + key + "' is required (" + what +
                                        "; no column has role " + std::string(to_string(*role)) + ")");
    }
    fail(ErrorKind::prerequisite, std::string("parameter '") + key + "' is required (" + what + ")");
  }

  std::vector<std::string> columns_or_role(const char* key, Role role) {
    auto names = strings(key);
    if (names.empty()) {
      for (const Column* c : ds.columns_with_role(role)) names.push_back(c->name());
      p[key] = names;
    }
    for (const auto& n : names) ds.column(n);
    return names;
  }
};

std::string_view card_vtype(VarType v) {
  switch (v) {
    case VarType::numerical:
    case VarType::datetime: return "numerical";
    case VarType::ordinal: return "ordinal";
    case VarType::categorical:
    case VarType::identifier: return "categorical";
  }
  return "categorical";
}

void check_applicable(Ctx& c, const Column& col) {
  auto vt = card_vtype(col.vtype());
  if (!c.card.supports_variable_type(vt)) {
    std::string supported;
    for (const auto& s : c.card.applicability.variable_types) supported += (supported.empty() ? "" : ", ") + s;
    c.fail(ErrorKind::applicability, "not applicable to " + std::string(vt) + " column '" + col.name() +
                                         "' (supports: " + supported + ")");
  }
}

void set_column_scope(Ctx& c, std::vector<std::string> cols) {
  c.r.scope.kind = cols.size() == 2 ? Scope::Kind::pair : Scope::Kind::column;
  c.r.scope.columns = std::move(cols);
}

std::vector<std::size_t> all_rows(const Dataset& ds) {
  std::vector<std::size_t> rows(ds.n_records());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

Sample numeric(Ctx& c, const Column& col) {
  check_applicable(c, col);
  auto s = column_sample(col, all_rows(c.ds));
  if (s.dropped > 0) c.warn(std::to_string(s.dropped) + " missing values in '" + col.name() + "' dropped");
  return s;
}

std::map<std::string, double> outcome_map(Ctx& c, const TestOutcome& t) {
  std::map<std::string, double> m{{"statistic", t.statistic}};
  if (t.p_value) m["p_value"] = *t.p_value;
  for (const auto& [k, v] : t.extra) m[k] = v;
  c.p["method"] = t.method;
  c.warn_all(t.warnings);
  return m;
}

// --- group comparisons ----------------------------------------------------

struct GroupSplit {
  std::vector<std::string> labels;
  std::vector<std::vector<std::size_t>> rows;
};

GroupSplit split_groups(Ctx& c, bool allow_many = false) {
  auto by = c.str("group_by");
  if (!by) c.fail(ErrorKind::prerequisite, "parameter 'group_by' is required (column defining the compared groups)");
  Groups g = group_by(c.ds, *by);
  if (!g.missing.empty()) c.warn(std::to_string(g.missing.size()) + " records without a '" + *by + "' value ignored");
  GroupSplit out;
  auto wanted = c.strings("groups");
  if (wanted.empty()) {
    if (!allow_many && g.groups.size() != 2) {
      c.fail(ErrorKind::prerequisite, "'" + *by + "' has " + std::to_string(g.groups.size()) +
                                          " groups; set 'groups' to the two labels to compare");
    }
    for (const auto& grp : g.groups) wanted.push_back(grp.label);
    c.p["groups"] = wanted;
  }
  if (!allow_many && wanted.size() != 2) c.fail(ErrorKind::invalid_argument, "'groups' must name exactly two labels");
  if (wanted.size() < 2) c.fail(ErrorKind::prerequisite, "at least two groups are required");
  for (const auto& w : wanted) {
    const auto* grp = g.find(w);
    if (!grp) c.fail(ErrorKind::invalid_argument, "group '" + w + "' does not occur in '" + *by + "'");
    out.labels.push_back(w);
    out.rows.push_back(grp->records);
  }
  return out;
}

struct TwoSamples {
  Sample a, b;
};

TwoSamples two_samples(Ctx& c) {
  const Column& col = c.column("column", std::nullopt, "compared variable");
  check_applicable(c, col);
  auto g = split_groups(c);
  TwoSamples s{column_sample(col, g.rows[0]), column_sample(col, g.rows[1])};
  if (s.a.dropped + s.b.dropped > 0)
    c.warn(std::to_string(s.a.dropped + s.b.dropped) + " missing values in '" + col.name() + "' dropped");
  c.r.scope.kind = Scope::Kind::groups;
  c.r.scope.columns = {col.name(), *c.str("group_by")};
  if (s.a.empty() || s.b.empty()) c.fail(ErrorKind::insufficient_data, "a compared group has no values");
  return s;
}

std::pair<CategoricalCounts, CategoricalCounts> category_pair(const Column& col, const GroupSplit& g) {
  auto all = category_counts(col);
  auto count_rows = [&](const std::vector<std::size_t>& rows) {
    CategoricalCounts cc;
    cc.labels = all.labels;
    cc.counts.assign(all.labels.size(), 0.0);
    for (auto r : rows) {
      if (col.is_missing(r)) continue;
      auto it = std::find(all.labels.begin(), all.labels.end(), col.text(r));
      cc.counts[static_cast<std::size_t>(it - all.labels.begin())] += 1.0;
    }
    return cc;
  };
  return {count_rows(g.rows[0]), count_rows(g.rows[1])};
}

Binning binning_from(Ctx& c) {
  auto kind = c.str("binning").value_or("equal_width");
  int bins = static_cast<int>(c.num("bins"));
  if (kind == "equal_width") return Binning::equal_width(bins);
  if (kind == "quantile") return Binning::quantile(bins);
  c.fail(ErrorKind::invalid_argument, "binning must be 'equal_width' or 'quantile'");
}

/// Counts of the two groups over shared categories or shared bins.
std::pair<CategoricalCounts, CategoricalCounts> distribution_pair(Ctx& c) {
  const Column& col = c.column("column", std::nullopt, "compared variable");
  check_applicable(c, col);
  auto g = split_groups(c);
  c.r.scope.kind = Scope::Kind::groups;
  c.r.scope.columns = {col.name(), *c.str("group_by")};
  if (col.vtype() == VarType::categorical || col.vtype() == VarType::identifier) {
    c.p["binning"] = "categories";
    return category_pair(col, g);
  }
  auto a = column_sample(col, g.rows[0]);
  auto b = column_sample(col, g.rows[1]);
  if (a.empty() || b.empty()) c.fail(ErrorKind::insufficient_data, "a compared group has no values");
  auto pair = binned_pair(a.values, b.values, binning_from(c));
  c.p["edges"] = pair.first.edges;
  c.warn_all(pair.first.warnings);
  return pair;
}

Subsample subsample_from(Ctx& c) {
  Subsample s;
  s.seed = c.seed;
  if (c.has("subsample")) s.size = static_cast<std::size_t>(c.num("subsample"));
  return s;
}

std::pair<EmbeddingSet, EmbeddingSet> embedding_pair(Ctx& c) {
  auto cols = c.strings("columns");
  if (cols.empty()) c.fail(ErrorKind::prerequisite, "parameter 'columns' is required (embedding dimensions)");
  std::vector<const Column*> cs;
  for (const auto& n : cols) {
    cs.push_back(&c.ds.column(n));
    if (!cs.back()->is_numeric()) c.fail(ErrorKind::applicability, "embedding column '" + n + "' is not numeric");
  }
  auto g = split_groups(c);
  std::size_t skipped = 0;
  auto build = [&](const std::vector<std::size_t>& rows) {
    std::vector<std::vector<double>> out;
    for (auto r : rows) {
      std::vector<double> v;
      for (const Column* col : cs) {
        if (col->is_missing(r)) break;
        v.push_back(col->number(r));
      }
      if (v.size() == cs.size()) {
        out.push_back(std::move(v));
      } else {
        ++skipped;
      }
    }
    return EmbeddingSet::from_rows(out);
  };
  auto pair = std::make_pair(build(g.rows[0]), build(g.rows[1]));
  if (skipped) c.warn(std::to_string(skipped) + " records with incomplete embeddings dropped");
  c.r.scope.kind = Scope::Kind::groups;
  c.r.scope.columns = cols;
  c.r.scope.columns.push_back(*c.str("group_by"));
  return pair;
}

// --- paired columns -------------------------------------------------------

struct Paired {
  std::vector<double> x, y;
};

double encode(Ctx& c, const Column& col, std::size_t i, const std::optional<std::string>& positive) {
  if (col.is_numeric()) return col.number(i);
  if (!positive)
    c.fail(ErrorKind::applicability, "categorical column '" + col.name() +
                                         "' needs 'target_positive' to define an indicator encoding");
  return col.text(i) == *positive ? 1.0 : 0.0;
}

Paired paired_columns(Ctx& c, const Column& x, const Column& y, const std::optional<std::string>& positive = {}) {
  Paired out;
  std::size_t dropped = 0;
  for (std::size_t i = 0; i < c.ds.n_records(); ++i) {
    if (x.is_missing(i) || y.is_missing(i)) {
      ++dropped;
      continue;
    }
    out.x.push_back(encode(c, x, i, std::nullopt));
    out.y.push_back(encode(c, y, i, positive));
  }
  if (dropped) c.warn(std::to_string(dropped) + " incomplete pairs dropped");
  set_column_scope(c, {x.name(), y.name()});
  return out;
}

Paired required_pair(Ctx& c, const char* first, const char* second, const char* what) {
  const Column& x = c.column(first, std::nullopt, what);
  const Column& y = c.column(second, std::nullopt, what);
  check_applicable(c, x);
  check_applicable(c, y);
  return paired_columns(c, x, y);
}

// --- evaluators -----------------------------------------------------------

std::vector<const SignalBlock*> signal_records(Ctx& c) {
  if (!c.ds.has_signals()) c.fail(ErrorKind::prerequisite, "the dataset has no measurement signals");
  std::vector<const SignalBlock*> blocks;
  for (const auto& s : c.ds.signals())
    if (s) blocks.push_back(&*s);
  if (c.has("max_records")) {
    auto limit = static_cast<std::size_t>(c.num("max_records"));
    if (blocks.size() > limit) {
      c.warn("entropy computed on the first " + std::to_string(limit) + " of " + std::to_string(blocks.size()) +
             " signal records");
      blocks.resize(limit);
    }
  }
  return blocks;
}

void eval_entropy(Ctx& c) {
  SampleEntropyParams sp{static_cast<int>(c.num("m")), c.num("r")};
  std::string source = c.str("source").value_or(c.has("column") ? "table" : (c.ds.has_signals() ? "signals" : ""));
  if (source.empty()) c.fail(ErrorKind::prerequisite, "needs signals or a 'column'");
  c.p["source"] = source;
  if (source == "table") {
    const Column& col = c.column("column", std::nullopt, "variable to assess");
    check_applicable(c, col);
    set_column_scope(c, {col.name()});
    if (col.is_numeric() && col.vtype() != VarType::ordinal) {
      auto s = numeric(c, col);
      auto res = sample_entropy(s.values, sp);
      c.warn_all(res.warnings);
      c.p["kind"] = "sample";
      c.r.value = res.value.value_or(std::numeric_limits<double>::quiet_NaN());
    } else {
      c.p["kind"] = "shannon";
      c.r.value = shannon_entropy(category_counts(col), c.num("base"));
    }
    return;
  }
  if (source != "signals") c.fail(ErrorKind::invalid_argument, "source must be 'signals' or 'table'");
  c.p["kind"] = "sample";
  auto blocks = signal_records(c);
  if (blocks.empty()) c.fail(ErrorKind::insufficient_data, "no signal records");

  std::vector<double> sums(blocks.size(), 0.0);
  std::vector<std::size_t> used(blocks.size(), 0), undefined(blocks.size(), 0);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      for (const auto& ch : blocks[i]->samples) {
        auto res = sample_entropy(ch, sp);
        if (res.value) {
          sums[i] += *res.value;
          ++used[i];
        } else {
          ++undefined[i];
        }
      }
    }
  };
  std::size_t n_threads = std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), 16));
  n_threads = std::min(n_threads, blocks.size());
  std::vector<std::thread> pool;
  std::size_t chunk = (blocks.size() + n_threads - 1) / n_threads;
  for (std::size_t t = 0; t < n_threads; ++t) {
    std::size_t b = t * chunk, e = std::min(blocks.size(), b + chunk);
    if (b < e) pool.emplace_back(work, b, e);
  }
  for (auto& th : pool) th.join();

  double total = 0;
  std::size_t n = 0, bad = 0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    total += sums[i];
    n += used[i];
    bad += undefined[i];
  }
  if (bad) c.warn(std::to_string(bad) + " channel series without matching templates excluded");
  if (n == 0) c.fail(ErrorKind::insufficient_data, "sample entropy undefined for every channel");
  c.p["records_used"] = blocks.size();
  c.r.value = total / static_cast<double>(n);
}

void eval_lod(Ctx& c, bool lod) {
  const Column& col = c.column("column", std::nullopt, "blank-sample measurements");
  auto s = numeric(c, col);
  set_column_scope(c, {col.name()});
  Warnings w;
  auto res = lod_loq(s.values, lod ? c.num("lod_k") : 3.3, lod ? 10.0 : c.num("loq_k"), &w);
  c.warn_all(w);
  c.r.value = lod ? res.lod : res.loq;
}

void eval_instrument(Ctx& c, bool systematic) {
  auto pr = required_pair(c, "column", "reference", "measured values and gold-standard reference");
  auto e = instrument_error(pr.x, pr.y);
  c.r.value = systematic ? e.systematic : e.random;
}

void eval_bland_altman(Ctx& c) {
  auto pr = required_pair(c, "first", "second", "two repeated measurements");
  c.r.value = bland_altman_cr(pr.x, pr.y);
}

void eval_repeatability(Ctx& c) {
  const Column& col = c.column("column", std::nullopt, "repeated measurements");
  check_applicable(c, col);
  const Column& subj = c.column("subject", Role::patient_id, "subject identifier");
  std::map<std::string, std::vector<double>> by;
  for (std::size_t i = 0; i < c.ds.n_records(); ++i)
    if (!col.is_missing(i) && !subj.is_missing(i)) by[subj.text(i)].push_back(col.number(i));
  RepeatedMeasures rm;
  for (auto& [id, v] : by) rm.subjects.push_back({id, std::move(v)});
  Warnings w;
  c.r.value = repeatability_cv(rm, &w);
  c.warn_all(w);
  set_column_scope(c, {col.name(), subj.name()});
}

void eval_reproducibility(Ctx& c) {
  const Column& col = c.column("column", std::nullopt, "measurements");
  check_applicable(c, col);
  const Column& cond = c.column("condition", std::nullopt, "condition such as laboratory or device");
  std::vector<double> v;
  std::vector<std::string> k;
  for (std::size_t i = 0; i < c.ds.n_records(); ++i) {
    if (col.is_missing(i) || cond.is_missing(i)) continue;
    v.push_back(col.number(i));
    k.push_back(cond.text(i));
  }
  Warnings w;
  auto res = reproducibility_variance(v, k, &w);
  c.warn_all(w);
  set_column_scope(c, {col.name(), cond.name()});
  c.r.value = std::map<std::string, double>{
      {"repeatability", res.repeatability}, {"between", res.between}, {"reproducibility", res.reproducibility}};
}

RatingsMatrix rater_matrix(Ctx& c, std::size_t min_raters, std::optional<std::size_t> exact = std::nullopt) {
  auto cols = c.columns_or_role("columns", Role::annotation);
  if (cols.size() < min_raters) {
    c.fail(ErrorKind::prerequisite, "requires annotations from at least " + std::to_string(min_raters) +
                                        " raters; found " + std::to_string(cols.size()) + " annotation column(s)");
  }
  if (exact && cols.size() != *exact)
    c.fail(ErrorKind::applicability, "requires exactly " + std::to_string(*exact) + " raters; found " +
                                         std::to_string(cols.size()));
  for (const auto& n : cols) check_applicable(c, c.ds.column(n));
  c.r.scope.kind = cols.size() == 2 ? Scope::Kind::pair : Scope::Kind::column;
  c.r.scope.columns = cols;
  return ratings_from_columns(c.ds, cols);
}

void eval_cohen(Ctx& c) {
  auto m = rater_matrix(c, 2, 2);
  auto w = c.str("weights").value_or("none");
  KappaWeights kw = w == "linear" ? KappaWeights::linear : w == "quadratic" ? KappaWeights::quadratic : KappaWeights::none;
  if (w != "none" && w != "linear" && w != "quadratic")
    c.fail(ErrorKind::invalid_argument, "weights must be none, linear or quadratic");
  Warnings ws;
  c.r.value = cohens_kappa(m, kw, &ws);
  c.warn_all(ws);
}

void eval_krippendorff(Ctx& c) {
  auto m = rater_matrix(c, 2);
  auto l = c.str("level").value_or("nominal");
  AlphaLevel level = AlphaLevel::nominal;
  if (l == "ordinal") level = AlphaLevel::ordinal;
  else if (l == "interval") level = AlphaLevel::interval;
  else if (l == "ratio") level = AlphaLevel::ratio;
  else if (l != "nominal") c.fail(ErrorKind::invalid_argument, "level must be nominal, ordinal, interval or ratio");
  c.r.value = krippendorff_alpha(m, level);
}

void eval_overlap(Ctx& c, OverlapKind kind) {
  auto pr = required_pair(c, "first", "second", "two binary masks");
  std::vector<std::uint8_t> a, b;
  for (std::size_t i = 0; i < pr.x.size(); ++i) {
    a.push_back(pr.x[i] != 0.0);
    b.push_back(pr.y[i] != 0.0);
  }
  Warnings w;
  c.r.value = overlap(a, b, kind, &w);
  c.warn_all(w);
}

void eval_completeness(Ctx& c) {
  auto source = c.str("source").value_or("table");
  if (source == "signals") {
    if (!c.ds.has_signals()) c.fail(ErrorKind::prerequisite, "the dataset has no measurement signals");
    c.r.value = measurement_completeness(c.ds);
  } else if (source == "table") {
    auto cols = c.strings("columns");
    c.r.value = completeness(c.ds, cols);
    if (!cols.empty()) {
      c.r.scope.kind = Scope::Kind::column;
      c.r.scope.columns = cols;
    }
  } else {
    c.fail(ErrorKind::invalid_argument, "source must be 'table' or 'signals'");
  }
}

void eval_patient_completeness(Ctx& c) {
  auto var = c.str("variable");
  if (!var) {
    if (!c.ds.has_signals()) c.fail(ErrorKind::prerequisite, "parameter 'variable' is required");
    var = "measurements";
    c.p["variable"] = *var;
  }
  if (!c.ds.column_with_role(Role::patient_id)) c.fail(ErrorKind::prerequisite, "requires a patient_id column");
  if (*var != "measurements") set_column_scope(c, {*var});
  c.r.value = patient_level_completeness(c.ds, *var);
}

void eval_record_completeness(Ctx& c) {
  Warnings w;
  c.r.value = record_completeness(c.ds, c.strings("required"), &w);
  c.warn_all(w);
}

void eval_syntactic(Ctx& c) {
  const Column& col = c.column("column", std::nullopt, "column with a dictionary");
  set_column_scope(c, {col.name()});
  std::set<std::string> dict;
  if (c.has("dictionary")) {
    for (const auto& s : c.strings("dictionary")) dict.insert(s);
  } else {
    auto it = c.ds.metadata().dictionaries.find(col.name());
    if (it == c.ds.metadata().dictionaries.end())
      c.fail(ErrorKind::prerequisite, "no dictionary of admissible values for '" + col.name() + "'");
    dict = it->second;
  }
  auto v = syntactic_accuracy(col, dict);
  if (!v) c.fail(ErrorKind::insufficient_data, "every entry of '" + col.name() + "' is missing");
  c.r.value = *v;
}

void eval_page_hinkley(Ctx& c) {
  const Column& col = c.column("column", std::nullopt, "ordered stream");
  auto s = numeric(c, col);
  set_column_scope(c, {col.name()});
  PageHinkleyParams php;
  php.delta = c.num("delta");
  php.lambda = c.num("lambda");
  auto d = c.str("direction").value_or("both");
  if (d == "increase") php.direction = PageHinkleyParams::Direction::increase;
  else if (d == "decrease") php.direction = PageHinkleyParams::Direction::decrease;
  else if (d == "both") php.direction = PageHinkleyParams::Direction::both;
  else c.fail(ErrorKind::invalid_argument, "direction must be increase, decrease or both");
  auto res = page_hinkley(s.values, php);
  std::map<std::string, double> m{{"alarms", static_cast<double>(res.alarms.size())},
                                  {"max_statistic", res.max_statistic}};
  if (!res.alarms.empty()) m["first_alarm"] = static_cast<double>(res.alarms.front());
  c.r.value = m;
}

void eval_granularity(Ctx& c) {
  std::set<Role> roles;
  for (const auto& r : c.strings("roles")) roles.insert(parse_role(r));
  c.r.value = static_cast<double>(granularity(c.ds, roles));
}

void eval_sampling(Ctx& c) {
  if (!c.ds.has_signals()) c.fail(ErrorKind::prerequisite, "the dataset has no measurement signals");
  auto f = sampling_frequency(c.ds);
  if (f.empty()) c.fail(ErrorKind::insufficient_data, "no signal records");
  if (f.size() == 1) {
    c.r.value = f.front();
  } else {
    c.warn("signal records use " + std::to_string(f.size()) + " different sampling rates");
    c.r.value = f;
  }
}

void eval_resolution(Ctx& c) {
  auto pr = required_pair(c, "width", "height", "image width and height in pixels");
  std::vector<std::pair<double, double>> sizes;
  for (std::size_t i = 0; i < pr.x.size(); ++i) sizes.emplace_back(pr.x[i], pr.y[i]);
  auto r = resolution(sizes);
  if (r.heterogeneous) c.warn("image sizes differ across records");
  c.r.value = std::map<std::string, double>{{"min_width", r.min_width},
                                            {"min_height", r.min_height},
                                            {"median_width", r.median_width},
                                            {"median_height", r.median_height}};
}

void eval_label_granularity(Ctx& c) {
  if (!c.has("hierarchy") || !c.p.at("hierarchy").is_object())
    c.fail(ErrorKind::prerequisite, "parameter 'hierarchy' (label -> parent map) is required");
  std::map<std::string, std::string> parent;
  for (const auto& [k, v] : c.p.at("hierarchy").items()) parent[k] = v.get<std::string>();
  std::set<std::string> labels;
  if (c.has("column")) {
    const Column& col = c.column("column");
    for (const auto& l : category_counts(col).labels) labels.insert(l);
    set_column_scope(c, {col.name()});
  }
  c.r.value = static_cast<double>(label_granularity(parent, labels));
}

CategoricalCounts class_counts(Ctx& c) {
  const Column& col = c.column("column", Role::target, "class labels");
  check_applicable(c, col);
  set_column_scope(c, {col.name()});
  return category_counts(col);
}

void eval_gir(Ctx& c) {
  Warnings w;
  c.r.value = imbalance_ratio(class_counts(c), &w);
  c.warn_all(w);
}

void eval_imbalance_degree(Ctx& c) {
  auto counts = class_counts(c);
  auto d = c.str("distance").value_or("total_variation");
  ImbalanceDistance dist = ImbalanceDistance::total_variation;
  if (d == "hellinger") dist = ImbalanceDistance::hellinger;
  else if (d == "euclidean") dist = ImbalanceDistance::euclidean;
  else if (d != "total_variation") c.fail(ErrorKind::invalid_argument, "distance must be total_variation, hellinger or euclidean");
  c.r.value = imbalance_degree(counts, dist);
}

void eval_currency(Ctx& c, CurrencyParams::Variant variant) {
  const Column& ts = c.column("timestamp", Role::timestamp, "record timestamps");
  if (!ts.is_numeric()) c.fail(ErrorKind::applicability, "timestamp column '" + ts.name() + "' is not a datetime");
  std::int64_t now = 0;
  if (auto e = c.str("evaluation_time")) {
    auto t = parse_datetime(*e);
    if (!t) c.fail(ErrorKind::invalid_argument, "cannot parse evaluation_time '" + *e + "'");
    now = *t;
  } else if (c.ds.metadata().evaluation_time) {
    now = *c.ds.metadata().evaluation_time;
    c.p["evaluation_time"] = std::to_string(now);
  } else {
    c.fail(ErrorKind::prerequisite, "parameter 'evaluation_time' is required");
  }
  CurrencyParams cp;
  cp.variant = variant;
  auto need = [&](const char* key) {
    if (!c.has(key)) c.fail(ErrorKind::prerequisite, std::string("parameter '") + key + "' is required");
    return c.num(key);
  };
  switch (variant) {
    case CurrencyParams::Variant::ballou:
      cp.volatility = need("volatility");
      cp.exponent = c.num("exponent");
      break;
    case CurrencyParams::Variant::li: cp.shelf_life = need("shelf_life"); break;
    case CurrencyParams::Variant::hinrichs: cp.update_rate = need("update_rate"); break;
    case CurrencyParams::Variant::heinrich: cp.decline = c.num("decline"); break;
  }
  double sum = 0;
  std::size_t n = 0, future = 0, missing = 0;
  for (std::size_t i = 0; i < c.ds.n_records(); ++i) {
    if (ts.is_missing(i)) {
      ++missing;
      continue;
    }
    double age = static_cast<double>(now) - ts.number(i);
    if (age < 0) {
      ++future;
      age = 0;
    }
    sum += currency(age, cp);
    ++n;
  }
  if (missing) c.warn(std::to_string(missing) + " records without a timestamp ignored");
  if (future) c.warn(std::to_string(future) + " timestamps after the evaluation time treated as age 0");
  if (n == 0) c.fail(ErrorKind::insufficient_data, "no timestamps");
  set_column_scope(c, {ts.name()});
  c.r.value = sum / static_cast<double>(n);
}

void eval_duplicates(Ctx& c) {
  auto keys = c.strings("keys");
  auto d = prevalence_of_duplicates(c.ds, keys);
  if (!keys.empty()) {
    c.r.scope.kind = Scope::Kind::column;
    c.r.scope.columns = keys;
  }
  c.r.value = std::map<std::string, double>{{"count", static_cast<double>(d.count)}, {"ratio", d.ratio}};
}

void eval_ess(Ctx& c) {
  if (c.has("cluster_size") || c.has("icc")) {
    if (!c.has("cluster_size") || !c.has("icc"))
      c.fail(ErrorKind::prerequisite, "the clustered form needs both 'cluster_size' and 'icc'");
    c.r.value = effective_sample_size_clustered(static_cast<double>(c.ds.n_records()), c.num("cluster_size"),
                                                c.num("icc"));
    return;
  }
  const Column* w = nullptr;
  if (auto name = c.str("weights")) {
    w = &c.ds.column(*name);
  } else {
    w = c.ds.column_with_role(Role::weight);
    if (!w) c.fail(ErrorKind::prerequisite, "needs a weight column or 'cluster_size' and 'icc'");
    c.p["weights"] = w->name();
  }
  auto s = numeric(c, *w);
  set_column_scope(c, {w->name()});
  c.r.value = effective_sample_size(s.values);
}

void eval_littles(Ctx& c) {
  auto cols = c.strings("columns");
  if (cols.empty()) {
    for (const auto& col : c.ds.columns())
      if (col.vtype() == VarType::numerical && col.spec().role == Role::feature) cols.push_back(col.name());
    c.p["columns"] = cols;
  }
  if (cols.size() < 2) c.fail(ErrorKind::prerequisite, "needs at least two numerical columns");
  std::vector<const Column*> cs;
  for (const auto& n : cols) {
    cs.push_back(&c.ds.column(n));
    check_applicable(c, *cs.back());
  }
  std::vector<std::vector<double>> rows(c.ds.n_records(), std::vector<double>(cs.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cs.size(); ++j)
      rows[i][j] = cs[j]->is_missing(i) ? std::numeric_limits<double>::quiet_NaN() : cs[j]->number(i);
  LittlesOptions o{c.num("tol"), static_cast<int>(c.num("max_iter"))};
  auto res = littles_mcar_test(rows, o);
  c.warn_all(res.warnings);
  c.r.scope.kind = Scope::Kind::column;
  c.r.scope.columns = cols;
  c.r.value = std::map<std::string, double>{
      {"d2", res.d2}, {"df", res.df}, {"p_value", res.p_value}, {"patterns", static_cast<double>(res.patterns)}};
}

void eval_summary(Ctx& c, int which) {
  const Column& col = c.column("column", std::nullopt, "variable to describe");
  auto s = numeric(c, col);
  set_column_scope(c, {col.name()});
  if (s.empty()) c.fail(ErrorKind::insufficient_data, "no values");
  auto st = summary_stats(s.values);
  if (which == 0) {
    c.r.value = st.range;
  } else if (which == 1) {
    c.r.value = st.iqr;
  } else {
    if (!st.std) c.fail(ErrorKind::insufficient_data, "standard deviation needs at least two values");
    c.r.value = std::map<std::string, double>{{"mean", st.mean}, {"std", *st.std}};
  }
}

void eval_hill(Ctx& c) {
  const Column& col = c.column("column", std::nullopt, "categorical variable");
  check_applicable(c, col);
  set_column_scope(c, {col.name()});
  c.r.value = hill_number(category_counts(col), c.num("q"));
}

void eval_mmd(Ctx& c) {
  auto s = two_samples(c);
  Kernel k;
  auto kind = c.str("kernel").value_or("rbf");
  if (kind == "rbf") {
    k = Kernel::rbf(c.has("bandwidth") ? std::optional<double>(c.num("bandwidth")) : std::nullopt);
  } else if (kind == "polynomial") {
    k = Kernel::polynomial(static_cast<int>(c.num("degree")), c.num("coef"));
  } else {
    c.fail(ErrorKind::invalid_argument, "kernel must be rbf or polynomial");
  }
  auto res = mmd(s.a.values, s.b.values, k, subsample_from(c));
  c.warn_all(res.warnings);
  if (kind == "rbf" && !c.has("bandwidth") && res.bandwidth) c.p["bandwidth_resolved"] = *res.bandwidth;
  c.r.value = res.value;
}

void eval_divergence(Ctx& c, DivergenceKind kind) {
  auto [a, b] = distribution_pair(c);
  DivergenceOptions o;
  if (kind != DivergenceKind::js) {
    o.strict = c.p.at("strict").get<bool>();
    o.epsilon = c.num("epsilon");
  }
  auto res = divergence(kind, a, b, o);
  c.warn_all(res.warnings);
  c.p["smoothed"] = res.smoothed;
  c.r.value = res.value;
}

void eval_chi(Ctx& c) {
  const Column& col = c.column("column", std::nullopt, "categorical variable");
  check_applicable(c, col);
  auto g = split_groups(c);
  c.r.scope.kind = Scope::Kind::groups;
  c.r.scope.columns = {col.name(), *c.str("group_by")};
  auto [a, b] = category_pair(col, g);
  c.r.value = outcome_map(c, chi_squared(a, b));
}

void eval_anderson(Ctx& c) {
  const Column& col = c.column("column", std::nullopt, "compared variable");
  check_applicable(c, col);
  auto g = split_groups(c, true);
  std::vector<std::vector<double>> samples;
  for (const auto& rows : g.rows) samples.push_back(column_sample(col, rows).values);
  c.r.scope.kind = Scope::Kind::groups;
  c.r.scope.columns = {col.name(), *c.str("group_by")};
  c.r.value = outcome_map(c, anderson_darling(samples));
}

void eval_corr(Ctx& c, std::optional<CorrelationKind> kind) {
  const Column& x = c.column("column", std::nullopt, "feature");
  const Column& y = c.column("target", Role::target, "target or second variable");
  check_applicable(c, x);
  if (!y.is_numeric() && !c.has("target_positive")) check_applicable(c, y);
  auto pr = paired_columns(c, x, y, c.str("target_positive"));
  if (pr.x.size() < 3) c.fail(ErrorKind::insufficient_data, "needs at least 3 complete pairs");
  c.r.value = kind ? correlation(*kind, pr.x, pr.y) : concordance_cc(pr.x, pr.y);
}

void eval_icc(Ctx& c) {
  auto m = rater_matrix(c, 2);
  std::size_t dropped = 0;
  c.r.value = icc(m, &dropped);
  if (dropped) c.warn(std::to_string(dropped) + " items with a missing rating dropped");
}

void eval_cramers(Ctx& c) {
  const Column& x = c.column("column", std::nullopt, "first categorical variable");
  const Column& y = c.column("target", Role::target, "second categorical variable");
  check_applicable(c, x);
  check_applicable(c, y);
  auto cx = category_counts(x), cy = category_counts(y);
  ContingencyTable t(cx.labels.size(), std::vector<double>(cy.labels.size(), 0.0));
  std::size_t dropped = 0;
  for (std::size_t i = 0; i < c.ds.n_records(); ++i) {
    if (x.is_missing(i) || y.is_missing(i)) {
      ++dropped;
      continue;
    }
    auto r = std::find(cx.labels.begin(), cx.labels.end(), x.text(i)) - cx.labels.begin();
    auto k = std::find(cy.labels.begin(), cy.labels.end(), y.text(i)) - cy.labels.begin();
    t[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)] += 1.0;
  }
  if (dropped) c.warn(std::to_string(dropped) + " incomplete pairs dropped");
  set_column_scope(c, {x.name(), y.name()});
  c.r.value = cramers_v(t);
}

using Fn = void (*)(Ctx&);

const std::map<std::string, Fn, std::less<>>& dispatch() {
  static const std::map<std::string, Fn, std::less<>> table = {
      {"entropy", eval_entropy},
      {"limit_of_detection", [](Ctx& c) { eval_lod(c, true); }},
      {"limit_of_quantification", [](Ctx& c) { eval_lod(c, false); }},
      {"systematic_error", [](Ctx& c) { eval_instrument(c, true); }},
      {"random_error", [](Ctx& c) { eval_instrument(c, false); }},
      {"bland_altman_cr", eval_bland_altman},
      {"repeatability_cv", eval_repeatability},
      {"reproducibility_variance", eval_reproducibility},
      {"cohens_kappa", eval_cohen},
      {"fleiss_kappa", [](Ctx& c) { c.r.value = fleiss_kappa(rater_matrix(c, 2)); }},
      {"kendalls_w", [](Ctx& c) { c.r.value = kendalls_w(rater_matrix(c, 2)); }},
      {"krippendorff_alpha", eval_krippendorff},
      {"dice", [](Ctx& c) { eval_overlap(c, OverlapKind::dice); }},
      {"iou", [](Ctx& c) { eval_overlap(c, OverlapKind::iou); }},
      {"completeness", eval_completeness},
      {"patient_level_completeness", eval_patient_completeness},
      {"record_completeness", eval_record_completeness},
      {"syntactic_accuracy", eval_syntactic},
      {"page_hinkley", eval_page_hinkley},
      {"dataset_size", [](Ctx& c) { c.r.value = static_cast<double>(dataset_size(c.ds)); }},
      {"granularity", eval_granularity},
      {"sampling_frequency", eval_sampling},
      {"resolution", eval_resolution},
      {"label_granularity", eval_label_granularity},
      {"generalized_imbalance_ratio", eval_gir},
      {"imbalance_degree", eval_imbalance_degree},
      {"lrid", [](Ctx& c) { c.r.value = lrid(class_counts(c)); }},
      {"currency_ballou", [](Ctx& c) { eval_currency(c, CurrencyParams::Variant::ballou); }},
      {"currency_li", [](Ctx& c) { eval_currency(c, CurrencyParams::Variant::li); }},
      {"currency_hinrichs", [](Ctx& c) { eval_currency(c, CurrencyParams::Variant::hinrichs); }},
      {"currency_heinrich", [](Ctx& c) { eval_currency(c, CurrencyParams::Variant::heinrich); }},
      {"prevalence_of_duplicates", eval_duplicates},
      {"effective_sample_size", eval_ess},
      {"littles_test", eval_littles},
      {"informative_dropout",
       [](Ctx& c) {
         c.fail(ErrorKind::not_implemented,
                "the likelihood model for informative dropout is listed in the registry but has no evaluator");
       }},
      {"range", [](Ctx& c) { eval_summary(c, 0); }},
      {"interquartile_range", [](Ctx& c) { eval_summary(c, 1); }},
      {"mean_std", [](Ctx& c) { eval_summary(c, 2); }},
      {"hill_number", eval_hill},
      {"mmd", eval_mmd},
      {"cohens_d",
       [](Ctx& c) {
         auto s = two_samples(c);
         c.r.value = cohens_d(s.a.values, s.b.values);
       }},
      {"energy_distance",
       [](Ctx& c) {
         auto s = two_samples(c);
         c.r.value = energy_distance(s.a.values, s.b.values, subsample_from(c));
       }},
      {"kl_divergence", [](Ctx& c) { eval_divergence(c, DivergenceKind::kl); }},
      {"psi", [](Ctx& c) { eval_divergence(c, DivergenceKind::psi); }},
      {"js_divergence", [](Ctx& c) { eval_divergence(c, DivergenceKind::js); }},
      {"ks_test",
       [](Ctx& c) {
         auto s = two_samples(c);
         c.r.value = outcome_map(c, ks_test(s.a.values, s.b.values));
       }},
      {"epps_singleton",
       [](Ctx& c) {
         auto s = two_samples(c);
         auto t = c.p.at("t").get<std::vector<double>>();
         c.r.value = outcome_map(c, epps_singleton(s.a.values, s.b.values, t));
       }},
      {"anderson_darling", eval_anderson},
      {"chi_squared", eval_chi},
      {"fid",
       [](Ctx& c) {
         auto [a, b] = embedding_pair(c);
         Warnings w;
         c.r.value = frechet_distance(a, b, &w);
         c.warn_all(w);
       }},
      {"kid",
       [](Ctx& c) {
         auto [a, b] = embedding_pair(c);
         Warnings w;
         c.r.value = kid(a, b, static_cast<int>(c.num("degree")), c.num("coef"), subsample_from(c), &w);
         c.warn_all(w);
       }},
      {"mann_whitney_u",
       [](Ctx& c) {
         auto s = two_samples(c);
         c.r.value =
             outcome_map(c, mann_whitney_u(s.a.values, s.b.values, static_cast<std::size_t>(c.num("exact_limit"))));
       }},
      {"wasserstein",
       [](Ctx& c) {
         auto s = two_samples(c);
         c.r.value = wasserstein_1d(s.a.values, s.b.values, c.num("order"));
       }},
      {"pearson", [](Ctx& c) { eval_corr(c, CorrelationKind::pearson); }},
      {"ccc", [](Ctx& c) { eval_corr(c, std::nullopt); }},
      {"goodman_kruskal_gamma", [](Ctx& c) { eval_corr(c, CorrelationKind::goodman_kruskal_gamma); }},
      {"kendall_tau", [](Ctx& c) { eval_corr(c, CorrelationKind::kendall_tau); }},
      {"spearman", [](Ctx& c) { eval_corr(c, CorrelationKind::spearman); }},
      {"icc", eval_icc},
      {"cramers_v", eval_cramers},
  };
  return table;
}

json number_json(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double number_from(const json& j) {
  if (j.is_number()) return j.get<double>();
  auto s = j.get<std::string>();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

std::string_view to_string(Scope::Kind kind) {
  switch (kind) {
    case Scope::Kind::global: return "global";
    case Scope::Kind::column: return "column";
    case Scope::Kind::pair: return "pair";
    case Scope::Kind::groups: return "groups";
  }
  return "global";
}

json value_to_json(const MetricValue& v) {
  if (const auto* d = std::get_if<double>(&v)) return number_json(*d);
  if (const auto* vec = std::get_if<std::vector<double>>(&v)) {
    json a = json::array();
    for (double x : *vec) a.push_back(number_json(x));
    return a;
  }
  json o = json::object();
  for (const auto& [k, x] : std::get<std::map<std::string, double>>(v)) o[k] = number_json(x);
  return o;
}

MetricValue value_from_json(const json& j) {
  if (j.is_array()) {
    std::vector<double> v;
    for (const auto& x : j) v.push_back(number_from(x));
    return v;
  }
  if (j.is_object()) {
    std::map<std::string, double> m;
    for (const auto& [k, x] : j.items()) m[k] = number_from(x);
    return m;
  }
  return number_from(j);
}

json to_json(const Scope& s) {
  return {{"kind", std::string(to_string(s.kind))}, {"columns", s.columns}, {"label", s.label}, {"context", s.context}};
}

Scope scope_from_json(const json& j) {
  Scope s;
  auto k = j.value("kind", "global");
  s.kind = k == "column" ? Scope::Kind::column : k == "pair" ? Scope::Kind::pair
           : k == "groups" ? Scope::Kind::groups : Scope::Kind::global;
  s.columns = j.value("columns", std::vector<std::string>{});
  s.label = j.value("label", "");
  s.context = j.value("context", "");
  return s;
}

const json& default_params(std::string_view metric_id) {
  const auto& table = defaults_table();
  auto it = table.find(std::string(metric_id));
  if (it == table.end()) throw Error(ErrorKind::unknown_id, "unknown metric '" + std::string(metric_id) + "'");
  return *it;
}

json scope_params(std::string_view metric_id, std::string_view label, const Dataset& ds) {
  const auto& d = default_params(metric_id);
  if (label.empty() || label == "all" || label == "labels") return json::object();
  if (label == "measurements") {
    if (d.contains("source")) return {{"source", "signals"}};
    if (d.contains("variable")) return {{"variable", "measurements"}};
    return json::object();
  }
  if (label == "metadata") {
    if (d.contains("source")) return {{"source", "table"}};
    return json::object();
  }
  std::string name(label);
  const Column* col = ds.find_column(name);
  if (!col)
    throw Error(ErrorKind::invalid_argument,
                std::string(metric_id) + ": scope '" + name + "' is neither a known label nor a column");
  if (d.contains("group_by") && !col->is_numeric()) return {{"group_by", name}};
  if (d.contains("column")) return {{"column", name}};
  if (d.contains("variable")) return {{"variable", name}};
  if (d.contains("columns")) return {{"columns", json::array({name})}};
  if (d.contains("keys")) return {{"keys", json::array({name})}};
  throw Error(ErrorKind::invalid_argument, std::string(metric_id) + " takes no column scope");
}

MetricResult evaluate(std::string_view metric_id, const Dataset& ds, const json& params, std::uint64_t seed) {
  const MetricCard& c = card(metric_id);
  json p = default_params(metric_id);
  if (!params.is_null()) {
    if (!params.is_object()) throw Error(ErrorKind::invalid_argument, c.id + ": parameters must be an object");
    for (const auto& [k, v] : params.items()) {
      if (!p.contains(k)) {
        std::string known;
        for (const auto& [dk, dv] : p.items()) known += (known.empty() ? "" : ", ") + dk;
        throw Error(ErrorKind::invalid_argument,
                    c.id + ": unknown parameter '" + k + "' (accepted: " + (known.empty() ? "none" : known) + ")");
      }
      p[k] = v;
    }
  }
  MetricResult r;
  r.metric_id = c.id;
  Ctx ctx{ds, c, std::move(p), seed, r};
  const auto& table = dispatch();
  auto it = table.find(metric_id);
  if (it == table.end()) throw Error(ErrorKind::not_implemented, c.id + ": no evaluator");
  it->second(ctx);
  r.params = std::move(ctx.p);
  return r;
}

}  // namespace dqm
