#include "dqm/harness.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <regex>
#include <sstream>

#include "dqm/error.hpp"
#include "dqm/registry.hpp"

namespace dqm {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

const std::vector<std::string>& ptbxl_metadata_columns() {
  static const std::vector<std::string> cols = {
      "ecg_id",        "patient_id",         "age",                "sex",
      "height",        "weight",             "nurse",              "site",
      "device",        "recording_date",     "report",             "scp_codes",
      "heart_axis",    "infarction_stadium1", "infarction_stadium2", "validated_by",
      "second_opinion", "initial_autogenerated_report", "validated_by_human", "baseline_drift",
      "static_noise",  "burst_noise",        "electrodes_problems", "extra_beats",
      "pacemaker",     "strat_fold"};
  return cols;
}

std::map<std::string, std::string> parse_kv(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::invalid_argument, "recipe option '" + item + "' lacks '='");
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

std::size_t to_count(const std::string& key, const std::string& v) {
  try {
    if (v.empty() || !std::all_of(v.begin(), v.end(), [](unsigned char ch) { return std::isdigit(ch); }))
      throw std::invalid_argument(v);
    std::size_t pos = 0;
    auto n = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return static_cast<std::size_t>(n);
  } catch (const std::exception&) {
    throw Error(ErrorKind::invalid_argument, "recipe option '" + key + "' must be a nonnegative integer");
  }
}

std::vector<std::size_t> draw(const std::vector<std::size_t>& pool, std::size_t n, std::mt19937_64& rng,
                              const std::string& stratum) {
  if (n > pool.size()) {
    throw Error(ErrorKind::insufficient_data, "stratum '" + stratum + "' has " + std::to_string(pool.size()) +
                                                  " records, " + std::to_string(n) + " requested");
  }
  std::vector<std::size_t> out;
  out.reserve(n);
  std::sample(pool.begin(), pool.end(), std::back_inserter(out), n, rng);
  return out;
}

const Column& recipe_column(const Dataset& ds, const std::string& name, Role fallback) {
  if (!name.empty()) return ds.column(name);
  if (const Column* c = ds.column_with_role(fallback)) return *c;
  throw Error(ErrorKind::prerequisite, "recipe needs a column name");
}

std::optional<double> scalar(const ReportEntry* e) {
  if (!e || e->error) return std::nullopt;
  if (const auto* d = std::get_if<double>(&e->result.value)) return *d;
  return std::nullopt;
}

const ReportEntry* find_entry(const Report& r, const std::string& metric, const std::string& scope) {
  for (const auto& e : r.results)
    if (e.result.metric_id == metric && e.result.scope.label == scope) return &e;
  return nullptr;
}

json delta_of(const MetricResult& a, const MetricResult& b) {
  if (const auto* x = std::get_if<double>(&a.value)) {
    if (const auto* y = std::get_if<double>(&b.value)) return value_to_json(*y - *x);
  }
  const auto* ma = std::get_if<std::map<std::string, double>>(&a.value);
  const auto* mb = std::get_if<std::map<std::string, double>>(&b.value);
  if (ma && mb) {
    json d = json::object();
    for (const auto& [k, v] : *ma) {
      auto it = mb->find(k);
      if (it != mb->end()) d[k] = value_to_json(it->second - v);
    }
    return d;
  }
  return nullptr;
}

}  // namespace

SubsetRecipe SubsetRecipe::parse(const std::string& text) {
  auto colon = text.find(':');
  std::string kind = text.substr(0, colon);
  auto kv = parse_kv(colon == std::string::npos ? "" : text.substr(colon + 1));
  auto take = [&](const std::string& key, const std::string& def) {
    auto it = kv.find(key);
    if (it == kv.end()) return def;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  SubsetRecipe r;
  if (kind == "sex_imbalance") {
    r.kind = Kind::sex_imbalance;
    r.column = take("column", "sex");
    r.label_a = take("male", "0");
    r.label_b = take("female", "1");
    r.n_a = to_count("n_male", take("n_male", "4000"));
    r.n_b = to_count("n_female", take("n_female", "1000"));
  } else if (kind == "device_filter") {
    r.kind = Kind::device_filter;
    r.column = take("column", "device");
    r.device = take("device", "CS-12");
    auto match = take("match", "prefix");
    if (match != "prefix" && match != "exact") throw Error(ErrorKind::invalid_argument, "match must be prefix or exact");
    r.prefix_match = match == "prefix";
  } else if (kind == "class_imbalance") {
    r.kind = Kind::class_imbalance;
    r.column = take("column", "");
    r.label_a = take("norm", "NORM");
    r.n_a = to_count("n_norm", take("n_norm", "250"));
    r.n_b = to_count("n_other", take("n_other", "4750"));
  } else {
    throw Error(ErrorKind::invalid_argument,
                "unknown recipe '" + kind + "' (sex_imbalance, device_filter or class_imbalance)");
  }
  r.seed = to_count("seed", take("seed", "0"));
  if (!kv.empty()) throw Error(ErrorKind::invalid_argument, "unknown recipe option '" + kv.begin()->first + "'");
  return r;
}

json SubsetRecipe::to_json() const {
  switch (kind) {
    case Kind::sex_imbalance:
      return {{"kind", "sex_imbalance"}, {"column", column}, {"male", label_a}, {"female", label_b},
              {"n_male", n_a},          {"n_female", n_b}, {"seed", seed}};
    case Kind::device_filter:
      return {{"kind", "device_filter"}, {"column", column}, {"device", device},
              {"match", prefix_match ? "prefix" : "exact"}};
    case Kind::class_imbalance:
      return {{"kind", "class_imbalance"}, {"column", column}, {"norm", label_a},
              {"n_norm", n_a},             {"n_other", n_b},   {"seed", seed}};
  }
  return nullptr;
}

std::vector<std::size_t> subset_rows(const Dataset& ds, const SubsetRecipe& r) {
  std::vector<std::size_t> out;
  std::mt19937_64 rng(r.seed);
  switch (r.kind) {
    case SubsetRecipe::Kind::sex_imbalance: {
      const Column& col = ds.column(r.column);
      std::vector<std::size_t> a, b;
      for (std::size_t i = 0; i < ds.n_records(); ++i) {
        if (col.is_missing(i)) continue;
        if (col.text(i) == r.label_a) a.push_back(i);
        if (col.text(i) == r.label_b) b.push_back(i);
      }
      out = draw(a, r.n_a, rng, r.label_a);
      auto more = draw(b, r.n_b, rng, r.label_b);
      out.insert(out.end(), more.begin(), more.end());
      break;
    }
    case SubsetRecipe::Kind::device_filter: {
      const Column& col = ds.column(r.column);
      for (std::size_t i = 0; i < ds.n_records(); ++i) {
        if (col.is_missing(i)) continue;
        const auto& t = col.text(i);
        if (r.prefix_match ? t.rfind(r.device, 0) == 0 : t == r.device) out.push_back(i);
      }
      if (out.empty()) throw Error(ErrorKind::insufficient_data, "no record from device '" + r.device + "'");
      break;
    }
    case SubsetRecipe::Kind::class_imbalance: {
      const Column& col = recipe_column(ds, r.column, Role::target);
      std::vector<std::size_t> a, b;
      for (std::size_t i = 0; i < ds.n_records(); ++i) {
        if (col.is_missing(i)) continue;
        (col.text(i) == r.label_a ? a : b).push_back(i);
      }
      out = draw(a, r.n_a, rng, r.label_a);
      auto more = draw(b, r.n_b, rng, "other");
      out.insert(out.end(), more.begin(), more.end());
      break;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

void check_same_schema(const Dataset& a, const Dataset& b) {
  std::size_t n = std::max(a.n_columns(), b.n_columns());
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= a.n_columns() || i >= b.n_columns()) {
      const auto& extra = i < a.n_columns() ? a.columns()[i] : b.columns()[i];
      throw Error(ErrorKind::invalid_argument, "schema mismatch at column '" + extra.name() + "': present in only one dataset");
    }
    const auto& x = a.columns()[i];
    const auto& y = b.columns()[i];
    if (x.name() != y.name() || x.vtype() != y.vtype()) {
      throw Error(ErrorKind::invalid_argument, "schema mismatch at column '" + x.name() + "' (" +
                                                   std::string(to_string(x.vtype())) + ") vs '" + y.name() + "' (" +
                                                   std::string(to_string(y.vtype())) + ")");
    }
  }
}

json compare_datasets(const Dataset& a, const Dataset& b, const std::vector<std::string>& metrics, const json& params,
                      std::uint64_t seed) {
  check_same_schema(a, b);
  json out;
  out["a"] = a.metadata().dataset_id;
  out["b"] = b.metadata().dataset_id;
  out["seed"] = seed;
  out["results"] = json::array();
  for (const auto& m : metrics) {
    json row;
    row["metric_id"] = m;
    std::optional<MetricResult> ra, rb;
    for (int side = 0; side < 2; ++side) {
      const Dataset& ds = side == 0 ? a : b;
      const char* key = side == 0 ? "a" : "b";
      try {
        auto r = evaluate(m, ds, entry_params(params, m, "", ds), seed);
        row[key] = {{"value", value_to_json(r.value)}, {"warnings", r.warnings}};
        (side == 0 ? ra : rb) = std::move(r);
      } catch (const Error& e) {
        row[key] = {{"error", e.what()}};
      }
    }
    row["delta"] = ra && rb ? delta_of(*ra, *rb) : json(nullptr);
    if (ra) row["params"] = ra->params;
    out["results"].push_back(row);
  }
  return out;
}

const json& ptbxl_profile() {
  static const json profile = json::parse(R"JSON({
    "dimensions": ["completeness", "noisy_labels", "accuracy", "currency", "target_class_balance", "granularity",
                   "dataset_size", "variety", "feature_importance", "uniqueness", "homogeneity"],
    "answers": {
      "completeness_interest": ["general", "patient-level"],
      "annotator_count": "one",
      "ground_truth": "no",
      "blank_sample": "no",
      "expiration_date": "no",
      "update_frequency_known": "no",
      "ml_task": "classification",
      "balance_focus": "general estimation",
      "modality": ["tabular", "image, time series"],
      "identicality": "fully identical",
      "variety.distribution_aspect": "single distribution",
      "variety.data_type": ["numerical", "categorical"],
      "homogeneity.distribution_aspect": "comparison",
      "homogeneity.comparison_approach": "distance",
      "homogeneity.input_kind": "raw values",
      "feature_importance.data_type": "numerical",
      "feature_importance.repeated_measurement_count": "two"
    },
    "picks": {
      "variety": ["range", "mean_std", "hill_number"],
      "homogeneity": ["mmd"],
      "feature_importance": ["pearson"]
    },
    "scopes": {
      "completeness": ["measurements", "metadata"],
      "patient_level_completeness": ["measurements"],
      "entropy": ["measurements"],
      "currency_heinrich": ["all"],
      "generalized_imbalance_ratio": ["labels"],
      "granularity": ["metadata"],
      "sampling_frequency": ["measurements"],
      "dataset_size": ["all"],
      "range": ["age"],
      "mean_std": ["age"],
      "hill_number": ["sex", "device"],
      "pearson": ["age"],
      "prevalence_of_duplicates": ["all"],
      "mmd": ["sex"]
    }
  })JSON");
  return profile;
}

json ptbxl_params(std::optional<std::size_t> entropy_records) {
  std::vector<std::string> keys;
  for (const auto& c : ptbxl_metadata_columns())
    if (c != "ecg_id") keys.push_back(c);
  json p;
  p["completeness"] = {{"scopes", {{"metadata", {{"columns", ptbxl_metadata_columns()}}}}}};
  p["entropy"] = {{"m", 2}, {"r", 0.2}};
  if (entropy_records) p["entropy"]["max_records"] = *entropy_records;
  p["currency_heinrich"] = {{"decline", 1e-9}};
  p["generalized_imbalance_ratio"] = {{"column", "superclass"}};
  p["granularity"] = {{"roles", {"feature", "patient_id", "timestamp"}}};
  p["prevalence_of_duplicates"] = {{"keys", keys}};
  p["pearson"] = {{"target", "superclass"}, {"target_positive", "NORM"}};
  p["mmd"] = {{"column", "age"}, {"kernel", "rbf"}};
  return p;
}

std::pair<DatasetDescriptor, CsvTable> ptbxl_descriptor(const HarnessOptions& o) {
  auto table = read_csv(o.root / "ptbxl_database.csv");
  auto scp = read_csv(o.root / "scp_statements.csv");

  std::map<std::string, std::string> superclass_of;
  std::size_t cls = scp.index("diagnostic_class");
  for (const auto& row : scp.rows)
    if (!row[cls].empty()) superclass_of[row[0]] = row[cls];

  static const std::regex entry(R"('([^']+)'\s*:\s*([-0-9.eE+]+))");
  std::size_t codes = table.index("scp_codes");
  table.header.push_back("superclass");
  for (auto& row : table.rows) {
    std::string best;
    double best_lik = -1;
    const std::string& s = row[codes];
    for (auto it = std::sregex_iterator(s.begin(), s.end(), entry); it != std::sregex_iterator(); ++it) {
      auto sc = superclass_of.find((*it)[1].str());
      if (sc == superclass_of.end()) continue;
      double lik = std::stod((*it)[2].str());
      if (lik > best_lik) {
        best_lik = lik;
        best = sc->second;
      }
    }
    row.push_back(best);
  }

  DatasetDescriptor d;
  d.dataset_id = "ptbxl";
  d.table_path = o.root / "ptbxl_database.csv";
  d.evaluation_time = o.evaluation_time;
  for (const auto& name : ptbxl_metadata_columns()) {
    ColumnSpec c;
    c.name = name;
    c.vtype = VarType::categorical;
    if (name == "age" || name == "height" || name == "weight") c.vtype = VarType::numerical;
    if (name == "ecg_id" || name == "patient_id") c.vtype = VarType::identifier;
    if (name == "recording_date") {
      c.vtype = VarType::datetime;
      c.role = Role::timestamp;
    }
    if (name == "patient_id") c.role = Role::patient_id;
    d.columns.push_back(c);
  }
  ColumnSpec target;
  target.name = "superclass";
  target.vtype = VarType::categorical;
  target.role = Role::target;
  d.columns.push_back(target);
  if (o.signals_dir) {
    SignalSpec s;
    s.dir = *o.signals_dir;
    s.format = "f32le";
    s.sampling_hz = o.low_rate ? 100.0 : 500.0;
    s.channels = {"I", "II", "III", "AVR", "AVL", "AVF", "V1", "V2", "V3", "V4", "V5", "V6"};
    s.file_column = o.low_rate ? "filename_lr" : "filename_hr";
    d.signals = s;
  }
  return {d, table};
}

bool HarnessOutcome::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed || c.skipped; });
}

std::string HarnessOutcome::markdown() const {
  std::ostringstream os;
  if (skipped) return "PTB-XL harness skipped: " + message + "\n";
  os << "| Dimension | Metric |";
  for (const auto& l : labels) os << " " << l << " |";
  os << "\n|---|---|";
  for (std::size_t i = 0; i < labels.size(); ++i) os << "---|";
  os << "\n";
  if (!reports.empty()) {
    for (std::size_t row = 0; row < reports.front().results.size(); ++row) {
      const auto& e0 = reports.front().results[row];
      const auto* c = find_card(e0.result.metric_id);
      os << "| " << e0.dimension << " | " << (c ? c->name : e0.result.metric_id) << " (" << e0.result.scope.label
         << ") |";
      for (const auto& r : reports) {
        const auto& e = r.results[row];
        os << " " << (e.error ? "error" : format_value(e.result.value)) << " |";
      }
      os << "\n";
    }
  }
  os << "\n";
  for (const auto& c : checks)
    os << "- [" << (c.skipped ? "SKIPPED" : c.passed ? "PASS" : "FAIL") << "] " << c.name << ": " << c.detail << "\n";
  return os.str();
}

HarnessOutcome ptbxl_harness(const HarnessOptions& o) {
  HarnessOutcome out;
  if (!fs::exists(o.root / "ptbxl_database.csv") || !fs::exists(o.root / "scp_statements.csv")) {
    out.skipped = true;
    out.message = "ptbxl_database.csv and scp_statements.csv not found under '" + o.root.string() + "'";
    return out;
  }
  auto [desc, table] = ptbxl_descriptor(o);
  auto no_signals = desc;
  no_signals.signals.reset();
  Dataset original = build_dataset(no_signals, table).dataset;

  SelectionResult sel = select_all(UseCaseProfile::from_json(ptbxl_profile()));
  json params = ptbxl_params(o.entropy_records);

  std::vector<std::pair<std::string, std::vector<std::size_t>>> sets;
  std::vector<std::size_t> all(original.n_records());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  sets.emplace_back("original", all);
  auto recipe_seed = std::to_string(o.seed);
  sets.emplace_back("subset 1 (sex)", subset_rows(original, SubsetRecipe::parse("sex_imbalance:seed=" + recipe_seed)));
  sets.emplace_back("subset 2 (device)", subset_rows(original, SubsetRecipe::parse("device_filter")));
  sets.emplace_back("subset 3 (class)",
                    subset_rows(original, SubsetRecipe::parse("class_imbalance:column=superclass,seed=" + recipe_seed)));

  std::string stamp = utc_timestamp();
  for (const auto& [label, rows] : sets) {
    Dataset ds = original.select_rows(rows);
    Report rep = run_report(ds, sel, params, o.seed, {}, stamp);
    rep.dataset_id = "ptbxl " + label;
    if (desc.signals) {
      std::vector<std::size_t> sig_rows = rows;
      if (o.signal_records && sig_rows.size() > *o.signal_records) sig_rows.resize(*o.signal_records);
      auto sig_desc = desc;
      sig_desc.rows = sig_rows;
      Dataset sig = build_dataset(sig_desc, table).dataset;
      for (auto& e : rep.results) {
        if (e.result.scope.label != "measurements") continue;
        ReportEntry redo;
        redo.dimension = e.dimension;
        try {
          redo.result = evaluate(e.result.metric_id, sig, entry_params(params, e.result.metric_id, "measurements", sig),
                                 o.seed);
          if (sig_rows.size() < rows.size())
            redo.result.warnings.push_back("computed on the first " + std::to_string(sig_rows.size()) + " of " +
                                           std::to_string(rows.size()) + " records");
        } catch (const Error& err) {
          redo.result.metric_id = e.result.metric_id;
          redo.error = err.what();
          redo.error_kind = to_string(err.kind());
        }
        redo.result.scope.label = "measurements";
        e = std::move(redo);
      }
    }
    out.labels.push_back(label);
    out.reports.push_back(std::move(rep));
  }

  auto value = [&](std::size_t r, const std::string& m, const std::string& scope) {
    return scalar(find_entry(out.reports[r], m, scope));
  };
  auto add = [&](std::string name, std::optional<double> v, auto pred, std::string expect, bool needs_signals = false) {
    HarnessCheck c;
    c.name = std::move(name);
    if (needs_signals && !desc.signals) {
      c.skipped = true;
      c.detail = "signals not staged";
    } else if (!v) {
      c.detail = "not computed";
    } else {
      c.passed = pred(*v);
      std::ostringstream os;
      os << "got " << *v << ", expected " << expect;
      c.detail = os.str();
    }
    out.checks.push_back(std::move(c));
  };
  auto near = [](double target, double tol) { return [=](double v) { return std::abs(v - target) <= tol; }; };

  add("dataset size", value(0, "dataset_size", "all"), near(21837, 0), "21837");
  add("granularity", value(0, "granularity", "metadata"), near(26, 0), "26");
  add("sampling frequency", value(0, "sampling_frequency", "measurements"), near(500, 0), "500", true);
  {
    const auto* e = find_entry(out.reports[0], "prevalence_of_duplicates", "all");
    std::optional<double> dup;
    if (e && !e->error) dup = std::get<std::map<std::string, double>>(e->result.value).at("count");
    add("duplicates", dup, near(0, 0), "0");
  }
  add("measurement completeness", value(0, "completeness", "measurements"), near(1.0, 1e-12), "1.00", true);
  add("Hill(device) original", value(0, "hill_number", "device"), near(5.59, 0.01), "5.59 +- 0.01");
  add("Hill(device) subset 2", value(2, "hill_number", "device"), near(1.0, 0.005), "1.00");
  add("subset 2 size", value(2, "dataset_size", "all"), near(4048, 0), "4048");
  auto orig_sex = value(0, "hill_number", "sex");
  add("Hill(sex) decreases in subset 1", value(1, "hill_number", "sex"),
      [&](double v) { return orig_sex && v < *orig_sex; }, "below the original");
  auto orig_gir = value(0, "generalized_imbalance_ratio", "labels");
  add("imbalance ratio rises in subset 3", value(3, "generalized_imbalance_ratio", "labels"),
      [&](double v) { return orig_gir && v > *orig_gir; }, "above the original");
  auto orig_ent = value(0, "entropy", "measurements");
  add("entropy rises in subset 2", value(2, "entropy", "measurements"),
      [&](double v) { return orig_ent && v > *orig_ent; }, "above the original", true);
  return out;
}

}  // namespace dqm
