#include "dqm/io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "dqm/error.hpp"

namespace dqm {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

ColumnSpec column_from_json(const json& j) {
  ColumnSpec c;
  c.name = j.at("name").get<std::string>();
  c.vtype = parse_var_type(j.value("vtype", "numerical"));
  c.role = parse_role(j.value("role", "feature"));
  if (j.contains("ordinal_order")) c.ordinal_order = j.at("ordinal_order").get<std::vector<std::string>>();
  if (j.contains("missing_tokens")) {
    c.missing_tokens.clear();
    for (const auto& t : j.at("missing_tokens")) c.missing_tokens.insert(t.get<std::string>());
  }
  return c;
}

json column_to_json(const ColumnSpec& c) {
  json j = {{"name", c.name}, {"vtype", std::string(to_string(c.vtype))}, {"role", std::string(to_string(c.role))}};
  if (!c.ordinal_order.empty()) j["ordinal_order"] = c.ordinal_order;
  j["missing_tokens"] = std::vector<std::string>(c.missing_tokens.begin(), c.missing_tokens.end());
  return j;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

}  // namespace

std::size_t CsvTable::index(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw Error(ErrorKind::parse, "table has no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable parse_csv(const std::string& text, char delimiter) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false, field_started = false;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    if (!(record.size() == 1 && record.front().empty())) records.push_back(std::move(record));
    record.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
      continue;
    }
    if (ch == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (ch == delimiter) {
      end_field();
    } else if (ch == '\n') {
      end_record();
    } else if (ch == '\r') {
      continue;
    } else {
      field += ch;
      field_started = true;
    }
  }
  if (quoted) throw Error(ErrorKind::parse, "unterminated quoted field");
  if (field_started || !record.empty()) end_record();

  CsvTable t;
  if (records.empty()) throw Error(ErrorKind::parse, "table is empty");
  t.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != t.header.size()) {
      throw Error(ErrorKind::parse, "table row " + std::to_string(r) + " has " + std::to_string(records[r].size()) +
                                        " fields, header has " + std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(records[r]));
  }
  return t;
}

CsvTable read_csv(const fs::path& path, char delimiter) { return parse_csv(read_file(path), delimiter); }

json read_json_file(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, path.string() + ": " + e.what());
  }
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(ErrorKind::io, "write failed for '" + path.string() + "'");
}

DatasetDescriptor DatasetDescriptor::from_json(const json& j, const fs::path& base_dir) {
  DatasetDescriptor d;
  try {
    d.dataset_id = j.value("dataset_id", "dataset");
    const auto& table = j.at("table");
    if (table.is_string()) {
      d.table_path = resolve(base_dir, table.get<std::string>());
    } else {
      d.table_path = resolve(base_dir, table.at("path").get<std::string>());
      auto delim = table.value("delimiter", ",");
      if (delim == "\\t" || delim == "tab") delim = "\t";
      if (delim.size() != 1) throw Error(ErrorKind::parse, "descriptor: delimiter must be one character");
      d.delimiter = delim.front();
    }
    for (const auto& c : j.at("columns")) d.columns.push_back(column_from_json(c));
    if (j.contains("signals") && !j.at("signals").is_null()) {
      const auto& s = j.at("signals");
      SignalSpec spec;
      spec.dir = resolve(base_dir, s.at("dir").get<std::string>());
      spec.format = s.value("format", "f32le");
      if (spec.format != "f32le" && spec.format != "csv")
        throw Error(ErrorKind::parse, "descriptor: signal format must be f32le or csv");
      spec.sampling_hz = s.value("sampling_hz", 0.0);
      if (s.contains("channels")) spec.channels = s.at("channels").get<std::vector<std::string>>();
      spec.file_column = s.at("file_column").get<std::string>();
      d.signals = std::move(spec);
    }
    if (j.contains("dictionaries")) {
      for (const auto& [col, v] : j.at("dictionaries").items()) {
        if (v.is_array()) {
          d.dictionaries[col] = v.get<std::vector<std::string>>();
        } else {
          d.dictionaries[col] = lines_of(read_file(resolve(base_dir, v.get<std::string>())));
        }
      }
    }
    if (j.contains("evaluation_time") && !j.at("evaluation_time").is_null())
      d.evaluation_time = j.at("evaluation_time").get<std::string>();
    if (j.contains("rows") && j.at("rows").is_string()) {
      std::vector<std::size_t> rows;
      for (const auto& line : lines_of(read_file(resolve(base_dir, j.at("rows").get<std::string>())))) {
        try {
          rows.push_back(std::stoull(line));
        } catch (const std::exception&) {
          throw Error(ErrorKind::parse, "descriptor: bad row index '" + line + "'");
        }
      }
      d.rows = std::move(rows);
    } else if (j.contains("rows") && !j.at("rows").is_null()) {
      d.rows = j.at("rows").get<std::vector<std::size_t>>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("descriptor: ") + e.what());
  }
  return d;
}

DatasetDescriptor DatasetDescriptor::load(const fs::path& path) {
  auto base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  return from_json(read_json_file(path), fs::absolute(base));
}

json DatasetDescriptor::to_json() const {
  json j;
  j["dataset_id"] = dataset_id;
  j["table"] = {{"path", fs::absolute(table_path).lexically_normal().string()}, {"delimiter", std::string(1, delimiter)}};
  j["columns"] = json::array();
  for (const auto& c : columns) j["columns"].push_back(column_to_json(c));
  if (signals) {
    j["signals"] = {{"dir", fs::absolute(signals->dir).lexically_normal().string()},
                    {"format", signals->format},
                    {"sampling_hz", signals->sampling_hz},
                    {"channels", signals->channels},
                    {"file_column", signals->file_column}};
  }
  json dict = json::object();
  for (const auto& [k, v] : dictionaries) dict[k] = v;
  j["dictionaries"] = dict;
  if (evaluation_time) j["evaluation_time"] = *evaluation_time;
  if (rows) j["rows"] = *rows;
  return j;
}

std::optional<SignalBlock> read_signal(const SignalSpec& spec, const std::string& stem) {
  SignalBlock b;
  b.sampling_hz = spec.sampling_hz;
  b.channel_names = spec.channels;
  if (spec.format == "csv") {
    fs::path path = spec.dir / (stem + ".csv");
    if (!fs::exists(path)) return std::nullopt;
    auto t = read_csv(path);
    b.channel_names = t.header;
    b.samples.assign(t.header.size(), {});
    for (const auto& row : t.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        try {
          b.samples[c].push_back(row[c].empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(row[c]));
        } catch (const std::exception&) {
          b.samples[c].push_back(std::numeric_limits<double>::quiet_NaN());
        }
      }
    }
    b.validate();
    return b;
  }
  fs::path data = spec.dir / (stem + ".f32");
  if (!fs::exists(data)) return std::nullopt;
  fs::path header = spec.dir / (stem + ".json");
  std::optional<std::size_t> n_samples;
  if (fs::exists(header)) {
    auto h = read_json_file(header);
    if (h.contains("sampling_hz")) b.sampling_hz = h.at("sampling_hz").get<double>();
    if (h.contains("channels")) {
      const auto& ch = h.at("channels");
      if (ch.is_array()) {
        b.channel_names = ch.get<std::vector<std::string>>();
      } else {
        b.channel_names.clear();
        for (int i = 0; i < ch.get<int>(); ++i) b.channel_names.push_back("ch" + std::to_string(i));
      }
    }
    if (h.contains("n_samples")) n_samples = h.at("n_samples").get<std::size_t>();
  }
  std::size_t n_ch = b.channel_names.size();
  if (n_ch == 0) throw Error(ErrorKind::parse, "signal '" + stem + "': channel count unknown");
  std::string bytes = read_file(data);
  std::size_t n_values = bytes.size() / 4;
  if (bytes.size() % 4 != 0 || n_values % n_ch != 0)
    throw Error(ErrorKind::parse, "signal '" + stem + "': size is not a multiple of the frame size");
  std::size_t n = n_values / n_ch;
  if (n_samples && *n_samples != n)
    throw Error(ErrorKind::parse, "signal '" + stem + "': header declares " + std::to_string(*n_samples) +
                                      " samples, file holds " + std::to_string(n));
  b.samples.assign(n_ch, std::vector<double>(n));
  for (std::size_t i = 0; i < n_values; ++i) {
    std::uint32_t raw;
    std::memcpy(&raw, bytes.data() + 4 * i, 4);
    if constexpr (std::endian::native == std::endian::big) raw = __builtin_bswap32(raw);
    float f;
    std::memcpy(&f, &raw, 4);
    b.samples[i % n_ch][i / n_ch] = f;
  }
  b.validate();
  return b;
}

LoadedDataset build_dataset(const DatasetDescriptor& desc, const CsvTable& table) {
  LoadedDataset out;
  std::vector<std::size_t> rows;
  if (desc.rows) {
    rows = *desc.rows;
    for (auto r : rows)
      if (r >= table.rows.size())
        throw Error(ErrorKind::parse, "descriptor row " + std::to_string(r) + " is outside the table");
  } else {
    rows.resize(table.rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  }

  std::vector<std::vector<std::string>> text(desc.columns.size());
  for (std::size_t c = 0; c < desc.columns.size(); ++c) {
    std::size_t idx;
    try {
      idx = table.index(desc.columns[c].name);
    } catch (const Error&) {
      throw Error(ErrorKind::parse, "descriptor column '" + desc.columns[c].name + "' is not in the table header");
    }
    text[c].reserve(rows.size());
    for (auto r : rows) text[c].push_back(table.rows[r][idx]);
  }

  std::vector<std::optional<SignalBlock>> signals;
  if (desc.signals) {
    std::size_t idx = table.index(desc.signals->file_column);
    std::size_t absent = 0;
    for (auto r : rows) {
      auto block = read_signal(*desc.signals, table.rows[r][idx]);
      if (!block) ++absent;
      signals.push_back(std::move(block));
    }
    if (absent) out.warnings.push_back(std::to_string(absent) + " records have no signal file");
  }

  Dataset::Metadata meta;
  meta.dataset_id = desc.dataset_id;
  if (desc.evaluation_time) {
    meta.evaluation_time = parse_datetime(*desc.evaluation_time);
    if (!meta.evaluation_time) throw Error(ErrorKind::parse, "cannot parse evaluation_time '" + *desc.evaluation_time + "'");
  }
  for (const auto& [col, values] : desc.dictionaries) meta.dictionaries[col] = {values.begin(), values.end()};
  out.dataset = Dataset::from_text(desc.columns, text, std::move(signals), std::move(meta));
  return out;
}

LoadedDataset load_dataset(const DatasetDescriptor& desc) {
  return build_dataset(desc, read_csv(desc.table_path, desc.delimiter));
}

}  // namespace dqm
