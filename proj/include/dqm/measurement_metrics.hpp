#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dqm/datamodel.hpp"
#include "dqm/dist_metrics.hpp"

namespace dqm {

/// -sum p ln p / ln(base); base e by default.
double shannon_entropy(const CategoricalCounts& c, double base = 2.718281828459045);

struct SampleEntropyParams {
  int m = 2;
  double r = 0.2;  // fraction of the population std of the series
};

struct SampleEntropyResult {
  std::optional<double> value;  // unset when A or B is zero
  double a = 0, b = 0;          // matching template pairs of length m+1 and m
  double tolerance = 0;
  Warnings warnings;
};

SampleEntropyResult sample_entropy(std::span<const double> series, const SampleEntropyParams& p = {});

struct LodLoq {
  double lod = 0, loq = 0, mean = 0, sd = 0;
};
LodLoq lod_loq(std::span<const double> blanks, double lod_k = 3.3, double loq_k = 10.0, Warnings* warnings = nullptr);

/// 1.96 times the sample sd of the within-pair differences.
double bland_altman_cr(std::span<const double> first, std::span<const double> second);

struct RepeatedMeasures {
  struct Subject {
    std::string id;
    std::vector<double> values;
  };
  std::vector<Subject> subjects;
};

/// sqrt(mean per-subject variance) / grand mean. Subjects with fewer than two
/// repeats are skipped.
double repeatability_cv(const RepeatedMeasures& rm, Warnings* warnings = nullptr);

struct ReproducibilityComponents {
  double repeatability = 0;    // s_r^2
  double between = 0;          // s_L^2
  double reproducibility = 0;  // s_R^2
  double n_bar = 0;
  bool balanced = true;
};
/// One-way ANOVA over the conditions (laboratories, devices, ...).
ReproducibilityComponents reproducibility_variance(std::span<const double> values,
                                                   const std::vector<std::string>& conditions,
                                                   Warnings* warnings = nullptr);

struct InstrumentError {
  double systematic = 0, random = 0;
};
InstrumentError instrument_error(std::span<const double> measured, std::span<const double> reference);

enum class KappaWeights { none, linear, quadratic };

/// Codes in the matrix index `m.labels` (or are integer category codes).
double cohens_kappa(const RatingsMatrix& m, KappaWeights weights = KappaWeights::none, Warnings* warnings = nullptr);
double fleiss_kappa(const RatingsMatrix& m);
/// Raters' scores are converted to average ranks per rater first.
double kendalls_w(const RatingsMatrix& m);

enum class AlphaLevel { nominal, ordinal, interval, ratio };
double krippendorff_alpha(const RatingsMatrix& m, AlphaLevel level = AlphaLevel::nominal);

enum class OverlapKind { dice, iou };
double overlap(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b, OverlapKind kind,
               Warnings* warnings = nullptr);

/// Non-missing cells / cells over the named columns (all columns when empty).
double completeness(const Dataset& ds, const std::vector<std::string>& columns = {});
/// Mean over records of the finite share of signal samples; records
/// without a signal block count as 0.
double measurement_completeness(const Dataset& ds);
/// Patients with at least one non-missing value / patients. The variable
/// "measurements" refers to the signal blocks.
double patient_level_completeness(const Dataset& ds, const std::string& variable);
double record_completeness(const Dataset& ds, const std::vector<std::string>& required, Warnings* warnings = nullptr);

}  // namespace dqm
