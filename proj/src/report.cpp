#include "dqm/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "dqm/error.hpp"
#include "dqm/registry.hpp"

namespace dqm {

using json = nlohmann::ordered_json;

namespace {

std::string two_decimals(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s = buf;
  if (s == "-0.00") s = "0.00";
  return s;
}

std::string title_case(std::string s) {
  std::replace(s.begin(), s.end(), '_', ' ');
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

std::size_t layout_rank(const std::string& dimension) {
  std::size_t i = 0;
  for (const auto& [cluster, dims] : report_layout()) {
    for (const auto& d : dims) {
      if (d == dimension) return i;
      ++i;
    }
  }
  return i;
}

}  // namespace

const std::vector<std::pair<std::string, std::vector<std::string>>>& report_layout() {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> layout = {
      {"Measurement process", {"completeness", "noisy_labels", "accuracy"}},
      {"Timeliness", {"currency"}},
      {"Representativeness", {"target_class_balance", "granularity", "dataset_size", "variety"}},
      {"Informativeness", {"feature_importance", "uniqueness", "informative_missingness"}},
      {"Consistency", {"homogeneity", "syntactic_consistency", "distribution_drift"}},
  };
  return layout;
}

std::string format_value(const MetricValue& v) {
  if (const auto* d = std::get_if<double>(&v)) return two_decimals(*d);
  std::string out;
  if (const auto* vec = std::get_if<std::vector<double>>(&v)) {
    for (double x : *vec) out += (out.empty() ? "" : ", ") + two_decimals(x);
    return "[" + out + "]";
  }
  for (const auto& [k, x] : std::get<std::map<std::string, double>>(v))
    out += (out.empty() ? "" : ", ") + k + "=" + two_decimals(x);
  return out;
}

json entry_params(const json& params_file, const std::string& metric_id, const std::string& scope, const Dataset& ds) {
  json p = scope_params(metric_id, scope, ds);
  if (!params_file.is_object() || !params_file.contains(metric_id)) return p;
  const json& block = params_file.at(metric_id);
  json merged = json::object();
  for (const auto& [k, v] : block.items())
    if (k != "scopes") merged[k] = v;
  for (const auto& [k, v] : p.items()) merged[k] = v;
  if (block.contains("scopes") && block.at("scopes").contains(scope)) {
    for (const auto& [k, v] : block.at("scopes").at(scope).items()) merged[k] = v;
  }
  return merged;
}

Report run_report(const Dataset& ds, const SelectionResult& selection, const json& params_file, std::uint64_t seed,
                  const std::vector<std::string>& extras, std::optional<std::string> generated_at) {
  Report rep;
  rep.dataset_id = ds.metadata().dataset_id;
  rep.selection = selection;
  rep.parameters = params_file.is_object() ? params_file : json::object();
  rep.seed = seed;
  rep.generated_at = generated_at ? *generated_at : utc_timestamp();

  auto run_one = [&](const std::string& dimension, const std::string& metric, const std::string& scope,
                     const std::string& context, bool extra) {
    ReportEntry e;
    e.dimension = dimension;
    e.manual_extra = extra;
    e.result.metric_id = metric;
    e.result.scope.label = scope;
    try {
      auto p = entry_params(params_file, metric, scope, ds);
      e.result = evaluate(metric, ds, p, seed);
    } catch (const Error& err) {
      e.error = err.what();
      e.error_kind = to_string(err.kind());
      try {
        e.result.params = default_params(metric);
      } catch (const Error&) {
      }
    }
    e.result.metric_id = metric;
    e.result.scope.label = scope.empty() ? "all" : scope;
    e.result.scope.context = context;
    rep.results.push_back(std::move(e));
  };

  auto entries = selection.entries();
  std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return layout_rank(a.dimension) < layout_rank(b.dimension);
  });
  for (const auto& en : entries) run_one(en.dimension, en.metric_id, en.scope, en.context, false);
  for (const auto& x : extras) run_one("", x, "", "", true);
  return rep;
}

json Report::to_json() const {
  json j;
  j["dataset_id"] = dataset_id;
  j["profile"] = selection.profile.to_json();
  j["selection"] = rationale_document(selection, parameters, generated_at);
  j["results"] = json::array();
  for (const auto& e : results) {
    json r;
    r["metric_id"] = e.result.metric_id;
    r["dimension"] = e.manual_extra ? json("manual extra") : json(e.dimension);
    r["scope"] = dqm::to_json(e.result.scope);
    r["params"] = e.result.params;
    r["value"] = e.error ? json(nullptr) : value_to_json(e.result.value);
    r["warnings"] = e.result.warnings;
    if (e.error) r["error"] = {{"kind", *e.error_kind}, {"message", *e.error}};
    j["results"].push_back(r);
  }
  j["environment"] = {{"library_version", DQM_VERSION}, {"seed", seed}, {"generated_at", generated_at}};
  return j;
}

std::string render_markdown(const Report& rep) {
  std::ostringstream os;
  os << "# Data quality report: " << rep.dataset_id << "\n\n";
  os << "| Cluster and dimension | Metric | Value |\n|---|---|---|\n";
  for (const auto& [cluster, dims] : report_layout()) {
    bool any = false;
    for (const auto& d : dims) {
      const auto* sel = rep.selection.find(d);
      if (sel && sel->relevant) any = true;
    }
    if (!any) continue;
    os << "| **" << cluster << "** | | |\n";
    for (const auto& d : dims) {
      const auto* sel = rep.selection.find(d);
      if (!sel || !sel->relevant) continue;
      bool first = true;
      for (const auto& e : rep.results) {
        if (e.manual_extra || e.dimension != d) continue;
        const auto* c = find_card(e.result.metric_id);
        std::string name = c ? c->name : e.result.metric_id;
        std::string value = e.error ? "error: " + *e.error_kind : format_value(e.result.value);
        os << "| " << (first ? title_case(d) : "") << " | " << name << " (" << e.result.scope.label << ") | " << value
           << " |\n";
        first = false;
      }
      if (first) {
        std::string why = sel->reason.empty() && !sel->unanswered.empty()
                              ? "unanswered: " + sel->unanswered.front().question
                              : sel->reason;
        os << "| " << title_case(d) << " | - | - (" << why << ") |\n";
      }
    }
  }
  bool extras = std::any_of(rep.results.begin(), rep.results.end(), [](const auto& e) { return e.manual_extra; });
  if (extras) {
    os << "| **Manual extras** | | |\n";
    for (const auto& e : rep.results) {
      if (!e.manual_extra) continue;
      std::string value = e.error ? "error: " + *e.error_kind : format_value(e.result.value);
      os << "| | " << e.result.metric_id << " | " << value << " |\n";
    }
  }
  std::vector<const ReportEntry*> notes;
  for (const auto& e : rep.results)
    if (e.error || !e.result.warnings.empty()) notes.push_back(&e);
  if (!notes.empty()) {
    os << "\n## Notes\n\n";
    for (const auto* e : notes) {
      os << "- " << e->result.metric_id << " (" << e->result.scope.label << "): ";
      std::string text;
      if (e->error) text = *e->error;
      for (const auto& w : e->result.warnings) text += (text.empty() ? "" : "; ") + w;
      os << text << "\n";
    }
  }
  os << "\nSeed " << rep.seed << ", library " << DQM_VERSION << ".\n";
  return os.str();
}

}  // namespace dqm
