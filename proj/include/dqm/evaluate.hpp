#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "dqm/datamodel.hpp"

namespace dqm {

struct Scope {
  enum class Kind { global, column, pair, groups };
  Kind kind = Kind::global;
  std::vector<std::string> columns;
  std::string label;    // the profile's scope label, e.g. "measurements"
  std::string context;  // subtree reference note
};

std::string_view to_string(Scope::Kind kind);

using MetricValue = std::variant<double, std::vector<double>, std::map<std::string, double>>;

struct MetricResult {
  std::string metric_id;
  Scope scope;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  MetricValue value = 0.0;
  std::vector<std::string> warnings;
};

/// Non-finite numbers are written as the strings "inf", "-inf" and "nan".
nlohmann::ordered_json value_to_json(const MetricValue& v);
MetricValue value_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json to_json(const Scope& s);
Scope scope_from_json(const nlohmann::ordered_json& j);

/// Parameter names and defaults accepted by the metric's evaluator. Throws
/// unknown_id.
const nlohmann::ordered_json& default_params(std::string_view metric_id);

/// Parameters implied by a profile scope label: "measurements" -> signals,
/// "metadata" -> table, "all"/"labels" -> defaults, otherwise a column name.
nlohmann::ordered_json scope_params(std::string_view metric_id, std::string_view label, const Dataset& ds);

/// Computes one metric. `params` overrides the defaults; unknown keys throw.
/// The seed drives any random subsampling.
MetricResult evaluate(std::string_view metric_id, const Dataset& ds,
                      const nlohmann::ordered_json& params = nlohmann::ordered_json::object(),
                      std::uint64_t seed = 0);

}  // namespace dqm
