#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "dqm/datamodel.hpp"
#include "dqm/dist_metrics.hpp"

namespace dqm {

/// Conforming non-missing entries / non-missing entries; unset when every
/// entry is missing.
std::optional<double> syntactic_accuracy(const Column& column, const std::set<std::string>& dictionary);

struct PageHinkleyParams {
  enum class Direction { increase, decrease, both };
  double delta = 0.005;
  double lambda = 50.0;
  Direction direction = Direction::both;
};

struct PageHinkleyResult {
  std::vector<std::size_t> alarms;  // sample indices, ascending
  double max_statistic = 0;         // largest m_t - min m observed
};

/// The detector restarts after each alarm.
PageHinkleyResult page_hinkley(std::span<const double> series, const PageHinkleyParams& p = {});

std::size_t dataset_size(const Dataset& ds);
/// Columns whose role is in `roles`.
std::size_t granularity(const Dataset& ds, const std::set<Role>& roles = {Role::feature});
/// Distinct declared rates of the signal blocks.
std::vector<double> sampling_frequency(const Dataset& ds);

struct ResolutionSummary {
  double min_width = 0, min_height = 0, median_width = 0, median_height = 0;
  std::size_t n = 0;
  bool heterogeneous = false;
};
ResolutionSummary resolution(const std::vector<std::pair<double, double>>& sizes);

/// Maximum root-to-leaf depth; `parent` maps label -> parent label and
/// roots are labels without a parent.
std::size_t label_granularity(const std::map<std::string, std::string>& parent,
                              const std::set<std::string>& labels = {});

/// max / min count; +inf when a declared class is empty.
double imbalance_ratio(const CategoricalCounts& c, Warnings* warnings = nullptr);

enum class ImbalanceDistance { total_variation, hellinger, euclidean };
double imbalance_degree(const CategoricalCounts& c, ImbalanceDistance d = ImbalanceDistance::total_variation);
double lrid(const CategoricalCounts& c);

struct CurrencyParams {
  enum class Variant { ballou, li, hinrichs, heinrich };
  Variant variant = Variant::heinrich;
  double volatility = 0;   // ballou, seconds
  double exponent = 1;     // ballou
  double shelf_life = 0;   // li, seconds
  double update_rate = 0;  // hinrichs, updates per second
  double decline = 1e-9;   // heinrich, per second
};

/// Currency of a value with age `age_seconds`.
double currency(double age_seconds, const CurrencyParams& p);

struct DuplicateSummary {
  std::size_t count = 0;
  double ratio = 0;
};
DuplicateSummary prevalence_of_duplicates(const Dataset& ds, const std::vector<std::string>& keys = {});

double effective_sample_size(std::span<const double> weights);
double effective_sample_size_clustered(double n, double cluster_size, double icc);

struct LittlesResult {
  double d2 = 0;
  double df = 0;
  double p_value = 0;
  std::size_t patterns = 0;
  std::size_t iterations = 0;
  bool converged = false;
  Warnings warnings;
};

struct LittlesOptions {
  double tol = 1e-6;
  int max_iter = 200;
};

/// Rows of `data` are records, NaN marks a missing cell.
LittlesResult littles_mcar_test(const std::vector<std::vector<double>>& data, const LittlesOptions& opts = {});

}  // namespace dqm
