#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dqm/evaluate.hpp"
#include "dqm/selection.hpp"

namespace dqm {

struct ReportEntry {
  std::string dimension;  // empty for manual extras
  MetricResult result;
  std::optional<std::string> error;
  std::optional<std::string> error_kind;
  bool manual_extra = false;
};

struct Report {
  std::string dataset_id;
  SelectionResult selection;
  nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
  std::vector<ReportEntry> results;
  std::uint64_t seed = 0;
  std::string generated_at;

  nlohmann::ordered_json to_json() const;
};

/// Display order of the dimensions in reports, grouped by cluster.
const std::vector<std::pair<std::string, std::vector<std::string>>>& report_layout();

/// Merges the metric's parameter block, the scope label's implied parameters
/// and the per-scope overrides from a params file
/// {metric: {..., "scopes": {label: {...}}}}.
nlohmann::ordered_json entry_params(const nlohmann::ordered_json& params_file, const std::string& metric_id,
                                    const std::string& scope, const Dataset& ds);

/// Evaluates every selected (metric, scope) entry. Failures are recorded per
/// entry and never abort the run. `extras` are metric ids computed in
/// addition to the selection.
Report run_report(const Dataset& ds, const SelectionResult& selection,
                  const nlohmann::ordered_json& params_file = nlohmann::ordered_json::object(),
                  std::uint64_t seed = 0, const std::vector<std::string>& extras = {},
                  std::optional<std::string> generated_at = std::nullopt);

/// Dimension-grouped table; numbers rounded to two decimals.
std::string render_markdown(const Report& report);

/// Two decimals, "inf"/"nan" kept; maps as "k=v, ...".
std::string format_value(const MetricValue& v);

}  // namespace dqm
