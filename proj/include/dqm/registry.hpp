#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dqm {

inline constexpr std::string_view kGroups[] = {
    "measurement_process",   "consistency",          "representativeness",      "timeliness",
    "informativeness",       "distribution_metrics", "correlation_coefficients"};

inline constexpr std::string_view kDimensions[] = {
    "accuracy",    "noisy_labels", "completeness",         "syntactic_consistency", "homogeneity",
    "distribution_drift", "dataset_size", "granularity",   "variety",               "target_class_balance",
    "currency",    "uniqueness",   "informative_missingness", "feature_importance"};

inline constexpr std::string_view kModalities[] = {"tabular", "image", "time-series", "text", "multimodal"};
inline constexpr std::string_view kVariableTypes[] = {"numerical", "categorical", "ordinal"};

enum class PitfallTag {
  parameter_choice,
  outlier_sensitivity,
  missing_value_sensitivity,
  small_sample_instability,
  imbalance_instability,
};

std::string_view to_string(PitfallTag tag);
PitfallTag parse_pitfall(std::string_view text);
/// Human-readable phrase, e.g. "sensitive to outliers".
std::string_view describe(PitfallTag tag);

struct MetricCard {
  std::string id;
  std::string name;
  std::vector<std::string> synonyms;
  std::string summary;
  std::string definition;
  std::string visualization;
  struct ValueRange {
    std::string interval, high, low;
  } value_range;
  std::vector<std::string> dimensions;
  std::string group;
  std::vector<std::string> references;
  std::string example;
  std::vector<std::string> relations;
  struct Applicability {
    std::vector<std::string> modalities;
    std::vector<std::string> variable_types;
  } applicability;
  std::vector<std::string> prerequisites;
  struct Pitfalls {
    std::vector<PitfallTag> tags;
    std::vector<std::string> notes;
  } pitfalls;

  bool has_dimension(std::string_view dim) const;
  bool supports_modality(std::string_view modality) const;
  bool supports_variable_type(std::string_view vtype) const;
};

/// The built-in registry in stable order. Parsed once, validated on first use.
const std::vector<MetricCard>& all_cards();
/// Throws unknown_id.
const MetricCard& card(std::string_view id);
const MetricCard* find_card(std::string_view id);

struct CardFilter {
  std::optional<std::string> dimension;
  std::optional<std::string> group;
  std::optional<std::string> modality;
  std::optional<std::string> variable_type;
};

/// Conjunctive filter in registry order. Unknown enum values throw.
std::vector<const MetricCard*> filter(const CardFilter& f);

enum class CardFormat { markdown, json };
CardFormat parse_card_format(std::string_view text);

std::string render_card(std::string_view id, CardFormat format);
std::string render_card(const MetricCard& card, CardFormat format);

/// Parses and validates a JSON array of cards (the embedded registry format).
std::vector<MetricCard> parse_cards(std::string_view json_text);

}  // namespace dqm
