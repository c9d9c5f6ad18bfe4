#include "dqm/datamodel.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <numeric>

#include "dqm/error.hpp"
#include "dqm/stats.hpp"

namespace dqm {

VarType parse_var_type(std::string_view text) {
  if (text == "numerical") return VarType::numerical;
  if (text == "categorical") return VarType::categorical;
  if (text == "ordinal") return VarType::ordinal;
  if (text == "datetime") return VarType::datetime;
  if (text == "identifier") return VarType::identifier;
  throw Error(ErrorKind::parse, "unknown variable type '" + std::string(text) + "'");
}

Role parse_role(std::string_view text) {
  if (text == "feature") return Role::feature;
  if (text == "target") return Role::target;
  if (text == "patient_id") return Role::patient_id;
  if (text == "timestamp") return Role::timestamp;
  if (text == "annotation") return Role::annotation;
  if (text == "weight") return Role::weight;
  throw Error(ErrorKind::parse, "unknown column role '" + std::string(text) + "'");
}

std::string_view to_string(VarType vtype) {
  switch (vtype) {
    case VarType::numerical: return "numerical";
    case VarType::categorical: return "categorical";
    case VarType::ordinal: return "ordinal";
    case VarType::datetime: return "datetime";
    case VarType::identifier: return "identifier";
  }
  return "numerical";
}

std::string_view to_string(Role role) {
  switch (role) {
    case Role::feature: return "feature";
    case Role::target: return "target";
    case Role::patient_id: return "patient_id";
    case Role::timestamp: return "timestamp";
    case Role::annotation: return "annotation";
    case Role::weight: return "weight";
  }
  return "feature";
}

void SignalBlock::validate() const {
  if (!(sampling_hz > 0.0) || !std::isfinite(sampling_hz))
    throw Error(ErrorKind::invalid_argument, "signal sampling rate must be positive");
  for (const auto& channel : samples) {
    if (channel.size() != samples.front().size())
      throw Error(ErrorKind::invalid_argument, "signal channels differ in length");
  }
  if (!channel_names.empty() && channel_names.size() != samples.size())
    throw Error(ErrorKind::invalid_argument, "channel name count does not match channel count");
}

double CategoricalCounts::total() const {
  return std::accumulate(counts.begin(), counts.end(), 0.0);
}

std::optional<double> CategoricalCounts::count_of(std::string_view label) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return counts[i];
  }
  return std::nullopt;
}

void CategoricalCounts::validate() const {
  for (double c : counts) {
    if (!(c >= 0.0) || !std::isfinite(c))
      throw Error(ErrorKind::invalid_argument, "category counts must be finite and nonnegative");
  }
}

RatingsMatrix RatingsMatrix::from_rows(const std::vector<std::vector<std::optional<double>>>& rows) {
  if (rows.empty()) throw Error(ErrorKind::invalid_argument, "ratings matrix needs at least one item");
  RatingsMatrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.raters)
      throw Error(ErrorKind::invalid_argument, "ratings rows differ in rater count");
    for (std::size_t r = 0; r < m.raters; ++r) m.at(i, r) = rows[i][r];
  }
  return m;
}

Column::Column(ColumnSpec spec, std::vector<std::string> text, std::vector<double> numbers,
               std::vector<std::uint8_t> missing)
    : spec_(std::move(spec)), text_(std::move(text)), numbers_(std::move(numbers)),
      missing_(std::move(missing)) {}

std::size_t Column::missing_count() const {
  return static_cast<std::size_t>(std::count(missing_.begin(), missing_.end(), std::uint8_t{1}));
}

bool Column::is_numeric() const {
  return spec_.vtype == VarType::numerical || spec_.vtype == VarType::ordinal ||
         spec_.vtype == VarType::datetime;
}

double Column::number(std::size_t i) const {
  if (!is_numeric())
    throw Error(ErrorKind::applicability, "column '" + spec_.name + "' is not numeric");
  return numbers_[i];
}

namespace {

std::optional<double> parse_double(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

bool read_int(std::string_view text, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > text.size()) return false;
  auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, out);
  return ec == std::errc() && ptr == text.data() + pos + len;
}

}  // namespace

std::optional<std::int64_t> parse_datetime(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  if (text.size() >= 10 && text[4] == '-' && text[7] == '-') {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    if (!read_int(text, 0, 4, y) || !read_int(text, 5, 2, mo) || !read_int(text, 8, 2, d))
      return std::nullopt;
    if (text.size() > 10) {
      if ((text[10] != ' ' && text[10] != 'T') || text.size() < 19 || text[13] != ':' || text[16] != ':')
        return std::nullopt;
      if (!read_int(text, 11, 2, h) || !read_int(text, 14, 2, mi) || !read_int(text, 17, 2, s))
        return std::nullopt;
      std::string_view rest = text.substr(19);
      if (!rest.empty() && rest.front() == '.') {
        std::size_t k = 1;
        while (k < rest.size() && std::isdigit(static_cast<unsigned char>(rest[k]))) ++k;
        rest.remove_prefix(k);
      }
      if (!(rest.empty() || rest == "Z")) return std::nullopt;
    }
    using namespace std::chrono;
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || s > 60) return std::nullopt;
    const auto days = sys_days{ymd}.time_since_epoch().count();
    return static_cast<std::int64_t>(days) * 86400 + h * 3600 + mi * 60 + s;
  }
  if (auto v = parse_double(text); v && std::isfinite(*v)) return static_cast<std::int64_t>(std::llround(*v));
  return std::nullopt;
}

Dataset Dataset::from_text(std::vector<ColumnSpec> specs,
                           const std::vector<std::vector<std::string>>& text_columns,
                           std::vector<std::optional<SignalBlock>> signals, Metadata metadata) {
  if (specs.size() != text_columns.size())
    throw Error(ErrorKind::invalid_argument, "column spec count does not match column data count");

  Dataset ds;
  ds.n_records_ = text_columns.empty() ? signals.size() : text_columns.front().size();

  std::set<std::string> names;
  std::map<Role, int> single_roles;
  for (const auto& spec : specs) {
    if (!names.insert(spec.name).second)
      throw Error(ErrorKind::invalid_argument, "duplicate column name '" + spec.name + "'");
    if (spec.role == Role::target || spec.role == Role::patient_id || spec.role == Role::timestamp) {
      if (++single_roles[spec.role] > 1)
        throw Error(ErrorKind::invalid_argument,
                    "more than one column with role '" + std::string(to_string(spec.role)) + "'");
    }
    if (spec.vtype == VarType::ordinal && spec.ordinal_order.empty())
      throw Error(ErrorKind::invalid_argument, "ordinal column '" + spec.name + "' needs ordinal_order");
  }

  for (std::size_t c = 0; c < specs.size(); ++c) {
    auto& spec = specs[c];
    const auto& tokens = text_columns[c];
    if (tokens.size() != ds.n_records_)
      throw Error(ErrorKind::invalid_argument, "column '" + spec.name + "' has " +
                                                   std::to_string(tokens.size()) + " cells, expected " +
                                                   std::to_string(ds.n_records_));
    std::vector<double> numbers(tokens.size(), 0.0);
    std::vector<std::uint8_t> missing(tokens.size(), 0);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const std::string& tok = tokens[i];
      if (spec.missing_tokens.count(tok)) {
        missing[i] = 1;
        continue;
      }
      switch (spec.vtype) {
        case VarType::numerical: {
          auto v = parse_double(tok);
          if (!v) {
            throw Error(ErrorKind::parse, "column '" + spec.name + "' row " + std::to_string(i) +
                                              ": '" + tok + "' is not a number");
          }
          if (!std::isfinite(*v)) missing[i] = 1;
          numbers[i] = *v;
          break;
        }
        case VarType::ordinal: {
          auto it = std::find(spec.ordinal_order.begin(), spec.ordinal_order.end(), tok);
          if (it == spec.ordinal_order.end())
            throw Error(ErrorKind::invalid_argument, "ordinal column '" + spec.name + "': category '" + tok +
                                                         "' is not in ordinal_order");
          numbers[i] = static_cast<double>(it - spec.ordinal_order.begin());
          break;
        }
        case VarType::datetime: {
          auto t = parse_datetime(tok);
          if (!t) {
            throw Error(ErrorKind::parse, "column '" + spec.name + "' row " + std::to_string(i) +
                                              ": '" + tok + "' is not a datetime");
          }
          numbers[i] = static_cast<double>(*t);
          break;
        }
        case VarType::categorical:
        case VarType::identifier:
          break;
      }
    }
    ds.columns_.emplace_back(spec, tokens, std::move(numbers), std::move(missing));
  }

  if (!signals.empty()) {
    if (signals.size() != ds.n_records_)
      throw Error(ErrorKind::invalid_argument, "signal block count does not match record count");
    for (const auto& block : signals) {
      if (block) block->validate();
    }
  }
  ds.signals_ = std::move(signals);
  ds.metadata_ = std::move(metadata);
  return ds;
}

const Column& Dataset::column(std::string_view name) const {
  if (const Column* c = find_column(name)) return *c;
  throw Error(ErrorKind::invalid_argument, "unknown column '" + std::string(name) + "'");
}

const Column* Dataset::find_column(std::string_view name) const {
  for (const auto& c : columns_) {
    if (c.name() == name) return &c;
  }
  return nullptr;
}

const Column* Dataset::column_with_role(Role role) const {
  for (const auto& c : columns_) {
    if (c.spec().role == role) return &c;
  }
  return nullptr;
}

std::vector<const Column*> Dataset::columns_with_role(Role role) const {
  std::vector<const Column*> out;
  for (const auto& c : columns_) {
    if (c.spec().role == role) out.push_back(&c);
  }
  return out;
}

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const {
  std::vector<ColumnSpec> specs;
  std::vector<std::vector<std::string>> text;
  for (const auto& c : columns_) {
    specs.push_back(c.spec());
    std::vector<std::string> tokens;
    tokens.reserve(rows.size());
    for (std::size_t r : rows) {
      if (r >= n_records_) throw Error(ErrorKind::invalid_argument, "row index out of range");
      tokens.push_back(c.is_missing(r) && c.text(r).empty() ? std::string() : c.text(r));
    }
    text.push_back(std::move(tokens));
  }
  std::vector<std::optional<SignalBlock>> sig;
  if (has_signals()) {
    for (std::size_t r : rows) sig.push_back(signals_[r]);
  }
  Dataset out = from_text(std::move(specs), text, std::move(sig), metadata_);
  out.n_records_ = rows.size();
  return out;
}

Sample column_sample(const Column& column, std::span<const std::size_t> rows) {
  if (!(column.vtype() == VarType::numerical || column.vtype() == VarType::ordinal ||
        column.vtype() == VarType::datetime))
    throw Error(ErrorKind::applicability,
                "column '" + column.name() + "' is " + std::string(to_string(column.vtype())) +
                    ", not numerical or ordinal");
  Sample s;
  s.values.reserve(rows.size());
  for (std::size_t r : rows) {
    if (column.is_missing(r)) {
      ++s.dropped;
    } else {
      s.values.push_back(column.number(r));
    }
  }
  return s;
}

Sample column_sample(const Dataset& ds, std::string_view name) {
  const Column& column = ds.column(name);
  std::vector<std::size_t> rows(ds.n_records());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return column_sample(column, rows);
}

const Groups::Group* Groups::find(std::string_view label) const {
  for (const auto& g : groups) {
    if (g.label == label) return &g;
  }
  return nullptr;
}

Groups group_by(const Dataset& ds, std::string_view name) {
  const Column& column = ds.column(name);
  if (column.vtype() == VarType::numerical || column.vtype() == VarType::datetime)
    throw Error(ErrorKind::applicability,
                "cannot group by " + std::string(to_string(column.vtype())) + " column '" + column.name() +
                    "' without binning");
  std::map<std::string, std::vector<std::size_t>> by_label;
  Groups out;
  for (std::size_t i = 0; i < column.size(); ++i) {
    if (column.is_missing(i)) {
      out.missing.push_back(i);
    } else {
      by_label[column.text(i)].push_back(i);
    }
  }
  if (column.vtype() == VarType::ordinal) {
    for (const auto& label : column.spec().ordinal_order) {
      auto it = by_label.find(label);
      if (it != by_label.end()) out.groups.push_back({label, std::move(it->second)});
    }
  } else {
    for (auto& [label, records] : by_label) out.groups.push_back({label, std::move(records)});
  }
  return out;
}

CategoricalCounts category_counts(const Column& column) {
  if (column.vtype() == VarType::numerical || column.vtype() == VarType::datetime)
    throw Error(ErrorKind::applicability, "column '" + column.name() + "' is not categorical or ordinal");
  std::map<std::string, double> counts;
  for (std::size_t i = 0; i < column.size(); ++i) {
    if (!column.is_missing(i)) counts[column.text(i)] += 1.0;
  }
  CategoricalCounts out;
  if (column.vtype() == VarType::ordinal) {
    for (const auto& label : column.spec().ordinal_order) {
      out.labels.push_back(label);
      out.counts.push_back(counts.count(label) ? counts[label] : 0.0);
    }
  } else {
    for (const auto& [label, n] : counts) {
      out.labels.push_back(label);
      out.counts.push_back(n);
    }
  }
  return out;
}

std::vector<double> bin_edges(std::span<const double> pooled, const Binning& binning,
                              std::vector<std::string>& warnings) {
  if (pooled.empty()) throw Error(ErrorKind::insufficient_data, "cannot bin an empty sample");
  switch (binning.kind) {
    case Binning::Kind::explicit_edges: {
      if (binning.edges.size() < 2)
        throw Error(ErrorKind::invalid_argument, "explicit binning needs at least two edges");
      if (!std::is_sorted(binning.edges.begin(), binning.edges.end()) ||
          std::adjacent_find(binning.edges.begin(), binning.edges.end()) != binning.edges.end())
        throw Error(ErrorKind::invalid_argument, "bin edges must be strictly increasing");
      return binning.edges;
    }
    case Binning::Kind::equal_width: {
      if (binning.bins < 1) throw Error(ErrorKind::invalid_argument, "bin count must be >= 1");
      const auto [lo, hi] = std::minmax_element(pooled.begin(), pooled.end());
      if (*lo == *hi) {
        warnings.push_back("parameter_choice: degenerate range (all values equal); using a single bin");
        return {*lo, *hi};
      }
      std::vector<double> edges(static_cast<std::size_t>(binning.bins) + 1);
      const double width = (*hi - *lo) / binning.bins;
      for (int i = 0; i <= binning.bins; ++i) edges[i] = *lo + width * i;
      edges.back() = *hi;
      return edges;
    }
    case Binning::Kind::quantile: {
      if (binning.bins < 1) throw Error(ErrorKind::invalid_argument, "bin count must be >= 1");
      std::vector<double> sorted(pooled.begin(), pooled.end());
      std::sort(sorted.begin(), sorted.end());
      std::vector<double> edges;
      for (int i = 0; i <= binning.bins; ++i) {
        const double q = stats::quantile_sorted(sorted, static_cast<double>(i) / binning.bins);
        if (edges.empty() || q > edges.back()) edges.push_back(q);
      }
      if (edges.size() < 2) {
        warnings.push_back("parameter_choice: degenerate range (all values equal); using a single bin");
        return {sorted.front(), sorted.back()};
      }
      if (edges.size() - 1 < static_cast<std::size_t>(binning.bins))
        warnings.push_back("parameter_choice: tied quantiles merged into " + std::to_string(edges.size() - 1) +
                           " bins");
      return edges;
    }
  }
  return {};
}

CategoricalCounts histogram_with_edges(std::span<const double> values, std::vector<double> edges) {
  CategoricalCounts out;
  const std::size_t k = edges.size() - 1;
  out.counts.assign(k, 0.0);
  for (std::size_t b = 0; b < k; ++b) out.labels.push_back("bin" + std::to_string(b));
  std::size_t clamped = 0;
  for (double v : values) {
    // Bins are (e_b, e_{b+1}] except the first, which is closed.
    auto it = std::lower_bound(edges.begin(), edges.end(), v);
    std::ptrdiff_t b = (it - edges.begin()) - 1;
    if (b < 0) {
      if (v < edges.front()) ++clamped;
      b = 0;
    } else if (static_cast<std::size_t>(b) >= k) {
      if (v > edges.back()) ++clamped;
      b = static_cast<std::ptrdiff_t>(k) - 1;
    }
    out.counts[static_cast<std::size_t>(b)] += 1.0;
  }
  if (clamped > 0)
    out.warnings.push_back(std::to_string(clamped) + " value(s) outside the bin edges assigned to the edge bins");
  out.edges = std::move(edges);
  return out;
}

CategoricalCounts histogram(const Sample& s, const Binning& binning) {
  std::vector<std::string> warnings;
  auto edges = bin_edges(s.values, binning, warnings);
  auto out = histogram_with_edges(s.values, std::move(edges));
  out.warnings.insert(out.warnings.begin(), warnings.begin(), warnings.end());
  return out;
}

RatingsMatrix ratings_from_columns(const Dataset& ds, const std::vector<std::string>& names) {
  std::vector<const Column*> cols;
  for (const auto& n : names) cols.push_back(&ds.column(n));
  if (cols.empty()) throw Error(ErrorKind::prerequisite, "no rater columns given");

  RatingsMatrix m(ds.n_records(), cols.size());
  const bool all_numeric = std::all_of(cols.begin(), cols.end(), [](const Column* c) {
    return c->vtype() == VarType::numerical || c->vtype() == VarType::ordinal;
  });
  const bool all_ordinal = std::all_of(cols.begin(), cols.end(),
                                       [](const Column* c) { return c->vtype() == VarType::ordinal; });
  if (all_ordinal) {
    m.labels = cols.front()->spec().ordinal_order;
    for (const Column* c : cols) {
      if (c->spec().ordinal_order != m.labels)
        throw Error(ErrorKind::invalid_argument, "rater columns use different ordinal orders");
    }
  }
  if (all_numeric) {
    for (std::size_t r = 0; r < cols.size(); ++r) {
      for (std::size_t i = 0; i < ds.n_records(); ++i) {
        if (!cols[r]->is_missing(i)) m.at(i, r) = cols[r]->number(i);
      }
    }
    return m;
  }
  std::set<std::string> labels;
  for (const Column* c : cols) {
    if (c->vtype() != VarType::categorical && c->vtype() != VarType::ordinal)
      throw Error(ErrorKind::applicability, "rater column '" + c->name() + "' mixes categorical and numeric types");
    for (std::size_t i = 0; i < c->size(); ++i) {
      if (!c->is_missing(i)) labels.insert(c->text(i));
    }
  }
  m.labels.assign(labels.begin(), labels.end());
  for (std::size_t r = 0; r < cols.size(); ++r) {
    for (std::size_t i = 0; i < ds.n_records(); ++i) {
      if (cols[r]->is_missing(i)) continue;
      auto it = std::lower_bound(m.labels.begin(), m.labels.end(), cols[r]->text(i));
      m.at(i, r) = static_cast<double>(it - m.labels.begin());
    }
  }
  return m;
}

}  // namespace dqm
