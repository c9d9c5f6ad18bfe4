#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dqm/io.hpp"
#include "dqm/report.hpp"

namespace dqm {

struct SubsetRecipe {
  enum class Kind { sex_imbalance, device_filter, class_imbalance };
  Kind kind = Kind::sex_imbalance;
  std::string column;            // sex, device or class column
  std::string label_a, label_b;  // sex_imbalance: male/female codes; class_imbalance: label_a is the "norm" class
  std::size_t n_a = 0, n_b = 0;  // counts per stratum
  std::string device;            // device_filter
  bool prefix_match = true;      // device_filter: match by prefix
  std::uint64_t seed = 0;

  /// "kind[:key=value,...]", e.g. "sex_imbalance:n_male=4000,n_female=1000,seed=7".
  static SubsetRecipe parse(const std::string& text);
  nlohmann::ordered_json to_json() const;
};

/// Row indices of the subset, ascending. Sampling is without replacement and
/// reproducible for a given seed. Throws insufficient_data when a stratum is
/// too small.
std::vector<std::size_t> subset_rows(const Dataset& ds, const SubsetRecipe& recipe);

/// Throws invalid_argument naming the first column that differs in name or type.
void check_same_schema(const Dataset& a, const Dataset& b);

/// Side-by-side results of `metrics` on both datasets plus deltas (b - a)
/// for scalar and named values.
nlohmann::ordered_json compare_datasets(const Dataset& a, const Dataset& b, const std::vector<std::string>& metrics,
                                        const nlohmann::ordered_json& params, std::uint64_t seed);

/// The use-case profile of the PTB-XL case study.
const nlohmann::ordered_json& ptbxl_profile();
/// Evaluator parameters used by the PTB-XL case study.
nlohmann::ordered_json ptbxl_params(std::optional<std::size_t> entropy_records);

struct HarnessOptions {
  std::filesystem::path root;
  std::optional<std::filesystem::path> signals_dir;  // pre-converted f32le records
  bool low_rate = false;                             // use filename_lr records
  std::optional<std::size_t> entropy_records;
  /// Signal-based metrics use the first N records of each dataset; all when unset.
  std::optional<std::size_t> signal_records = 1000;
  std::uint64_t seed = 0;
  std::string evaluation_time = "2025-01-01";
};

struct HarnessCheck {
  std::string name;
  bool passed = false;
  bool skipped = false;  // needs data that is not staged
  std::string detail;
};

struct HarnessOutcome {
  bool skipped = false;
  std::string message;
  std::vector<std::string> labels;  // original, subset 1-3
  std::vector<Report> reports;
  std::vector<HarnessCheck> checks;

  bool passed() const;
  /// Result grid with one value column per dataset.
  std::string markdown() const;
};

/// Runs the case study when ptbxl_database.csv and scp_statements.csv are
/// present under `root`; otherwise returns a skipped outcome.
HarnessOutcome ptbxl_harness(const HarnessOptions& options);

/// Descriptor and derived table (with the diagnostic superclass column) for
/// the PTB-XL metadata.
std::pair<DatasetDescriptor, CsvTable> ptbxl_descriptor(const HarnessOptions& options);

}  // namespace dqm
