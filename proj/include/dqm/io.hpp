#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dqm/datamodel.hpp"

namespace dqm {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header field; throws when absent.
  std::size_t index(const std::string& name) const;
};

/// RFC 4180 style: quoted fields may hold delimiters, doubled quotes and newlines.
CsvTable parse_csv(const std::string& text, char delimiter = ',');
CsvTable read_csv(const std::filesystem::path& path, char delimiter = ',');

struct SignalSpec {
  std::filesystem::path dir;
  std::string format = "f32le";  // or "csv"
  double sampling_hz = 0;
  std::vector<std::string> channels;
  std::string file_column;  // table field holding the per-record file stem
};

struct DatasetDescriptor {
  std::string dataset_id;
  std::filesystem::path table_path;
  char delimiter = ',';
  std::vector<ColumnSpec> columns;
  std::optional<SignalSpec> signals;
  /// Column -> admissible values, read from a file (one per line) or inline.
  std::map<std::string, std::vector<std::string>> dictionaries;
  std::optional<std::string> evaluation_time;
  /// Subset of table rows (0-based, in order); all rows when unset.
  std::optional<std::vector<std::size_t>> rows;

  /// Relative paths resolve against `base_dir`.
  static DatasetDescriptor from_json(const nlohmann::ordered_json& j, const std::filesystem::path& base_dir);
  static DatasetDescriptor load(const std::filesystem::path& path);
  /// Paths are written absolute.
  nlohmann::ordered_json to_json() const;
};

struct LoadedDataset {
  Dataset dataset;
  std::vector<std::string> warnings;
};

/// Builds the dataset from an already parsed table. Records whose signal
/// file is missing carry no signal block and produce a warning.
LoadedDataset build_dataset(const DatasetDescriptor& desc, const CsvTable& table);
LoadedDataset load_dataset(const DatasetDescriptor& desc);

/// One record: X.f32 (little-endian float32, channel-interleaved) with an
/// optional X.json header {channels, sampling_hz, n_samples}; or X.csv.
std::optional<SignalBlock> read_signal(const SignalSpec& spec, const std::string& stem);

nlohmann::ordered_json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace dqm
