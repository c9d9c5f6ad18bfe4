#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dqm {

enum class VarType { numerical, categorical, ordinal, datetime, identifier };
enum class Role { feature, target, patient_id, timestamp, annotation, weight };

VarType parse_var_type(std::string_view text);
Role parse_role(std::string_view text);
std::string_view to_string(VarType vtype);
std::string_view to_string(Role role);

struct ColumnSpec {
  std::string name;
  VarType vtype = VarType::numerical;
  Role role = Role::feature;
  /// Category order for ordinal columns; codes are positions in this list.
  std::vector<std::string> ordinal_order;
  /// Raw tokens that mark a cell as missing.
  std::set<std::string> missing_tokens{"", "NA", "NaN", "nan"};
};

/// Per-record multichannel signal payload (e.g. one ECG recording).
struct SignalBlock {
  std::vector<std::vector<double>> samples;  // one sequence per channel
  double sampling_hz = 0.0;
  std::vector<std::string> channel_names;

  std::size_t n_channels() const { return samples.size(); }
  std::size_t n_samples() const { return samples.empty() ? 0 : samples.front().size(); }
  /// Throws unless channels are equal length and the rate is positive.
  void validate() const;
};

/// Finite values of one column with missing cells removed.
struct Sample {
  std::vector<double> values;
  std::size_t dropped = 0;

  std::size_t size() const { return values.size(); }
  bool empty() const { return values.empty(); }
};

/// Category label -> nonnegative count. Bin edges are kept when the counts
/// come from discretizing a continuous sample.
struct CategoricalCounts {
  std::vector<std::string> labels;
  std::vector<double> counts;
  std::vector<double> edges;
  std::vector<std::string> warnings;

  double total() const;
  std::size_t size() const { return counts.size(); }
  std::optional<double> count_of(std::string_view label) const;
  /// Throws on negative counts.
  void validate() const;
};

struct Binning {
  enum class Kind { equal_width, explicit_edges, quantile };
  Kind kind = Kind::equal_width;
  int bins = 10;
  std::vector<double> edges;

  static Binning equal_width(int k) { return {Kind::equal_width, k, {}}; }
  static Binning quantile(int k) { return {Kind::quantile, k, {}}; }
  static Binning explicit_edges(std::vector<double> e) {
    return {Kind::explicit_edges, static_cast<int>(e.size()) - 1, std::move(e)};
  }
};

/// Items x raters grid. Cells hold numeric codes (category index, ordinal
/// rank or a real rating); `labels` names the codes for categorical data.
struct RatingsMatrix {
  std::size_t items = 0;
  std::size_t raters = 0;
  std::vector<std::optional<double>> cells;  // row-major, items x raters
  std::vector<std::string> labels;

  RatingsMatrix() = default;
  RatingsMatrix(std::size_t n_items, std::size_t n_raters)
      : items(n_items), raters(n_raters), cells(n_items * n_raters) {}

  static RatingsMatrix from_rows(const std::vector<std::vector<std::optional<double>>>& rows);

  const std::optional<double>& at(std::size_t item, std::size_t rater) const {
    return cells[item * raters + rater];
  }
  std::optional<double>& at(std::size_t item, std::size_t rater) {
    return cells[item * raters + rater];
  }
};

class Column {
 public:
  Column(ColumnSpec spec, std::vector<std::string> text, std::vector<double> numbers,
         std::vector<std::uint8_t> missing);

  const ColumnSpec& spec() const { return spec_; }
  const std::string& name() const { return spec_.name; }
  VarType vtype() const { return spec_.vtype; }
  std::size_t size() const { return missing_.size(); }
  bool is_missing(std::size_t i) const { return missing_[i] != 0; }
  std::size_t missing_count() const;
  bool is_numeric() const;

  /// Numeric value of a non-missing cell: the number itself, the ordinal code
  /// or the epoch second for datetime columns.
  double number(std::size_t i) const;
  /// Raw token of the cell (empty when the token was absent).
  const std::string& text(std::size_t i) const { return text_[i]; }

 private:
  ColumnSpec spec_;
  std::vector<std::string> text_;
  std::vector<double> numbers_;
  std::vector<std::uint8_t> missing_;
};

/// Immutable typed columnar table plus optional per-record signal blocks.
class Dataset {
 public:
  struct Metadata {
    std::string dataset_id;
    std::optional<std::int64_t> evaluation_time;  // epoch seconds
    std::map<std::string, std::set<std::string>> dictionaries;
  };

  Dataset() = default;

  /// Parses raw tokens column by column; `text_columns[c]` holds the tokens
  /// of `specs[c]`. `signals` is empty or has one entry per record.
  static Dataset from_text(std::vector<ColumnSpec> specs,
                           const std::vector<std::vector<std::string>>& text_columns,
                           std::vector<std::optional<SignalBlock>> signals = {},
                           Metadata metadata = {});

  std::size_t n_records() const { return n_records_; }
  std::size_t n_columns() const { return columns_.size(); }
  const std::vector<Column>& columns() const { return columns_; }
  const Column& column(std::string_view name) const;
  const Column* find_column(std::string_view name) const;
  /// The single column carrying `role`, if any.
  const Column* column_with_role(Role role) const;
  std::vector<const Column*> columns_with_role(Role role) const;

  bool has_signals() const { return !signals_.empty(); }
  const std::vector<std::optional<SignalBlock>>& signals() const { return signals_; }
  const Metadata& metadata() const { return metadata_; }

  /// Records in `rows` (in the given order) as a new dataset.
  Dataset select_rows(std::span<const std::size_t> rows) const;

 private:
  std::vector<Column> columns_;
  std::vector<std::optional<SignalBlock>> signals_;
  std::size_t n_records_ = 0;
  Metadata metadata_;
};

/// Finite values of a numerical or ordinal column in record order.
Sample column_sample(const Dataset& ds, std::string_view column);
Sample column_sample(const Column& column, std::span<const std::size_t> rows);

struct Groups {
  struct Group {
    std::string label;
    std::vector<std::size_t> records;
  };
  std::vector<Group> groups;          // sorted by label (ordinal order for ordinal columns)
  std::vector<std::size_t> missing;   // records with a missing group value

  const Group* find(std::string_view label) const;
};

/// Partition of non-missing records by the value of a categorical/ordinal column.
Groups group_by(const Dataset& ds, std::string_view column);

/// Counts of the non-missing categories of a categorical/ordinal column.
CategoricalCounts category_counts(const Column& column);

/// Edges for discretizing `pooled` according to `binning`. Warnings (e.g. a
/// degenerate range) are appended to `warnings`.
std::vector<double> bin_edges(std::span<const double> pooled, const Binning& binning,
                              std::vector<std::string>& warnings);
CategoricalCounts histogram_with_edges(std::span<const double> values, std::vector<double> edges);
CategoricalCounts histogram(const Sample& s, const Binning& binning);

/// Ratings matrix from annotation columns; categorical columns share one
/// label space (ordinal order when every column is ordinal).
RatingsMatrix ratings_from_columns(const Dataset& ds, const std::vector<std::string>& columns);

/// Parses "YYYY-MM-DD", "YYYY-MM-DD HH:MM:SS", "YYYY-MM-DDTHH:MM:SS[Z]" or a
/// plain number of epoch seconds.
std::optional<std::int64_t> parse_datetime(std::string_view text);

}  // namespace dqm
