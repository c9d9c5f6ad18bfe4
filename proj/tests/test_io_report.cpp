#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "dqm/error.hpp"
#include "dqm/harness.hpp"
#include "dqm/io.hpp"
#include "dqm/report.hpp"
#include "dqm/selection.hpp"

using namespace dqm;
using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

const std::string kData = DQM_TEST_DATA;

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("dqm_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const Dataset& fixture() {
  static const Dataset ds = load_dataset(DatasetDescriptor::load(kData + "/fixture/dataset.json")).dataset;
  return ds;
}

SelectionResult ptbxl_selection() { return select_all(UseCaseProfile::from_json(ptbxl_profile())); }

}  // namespace

TEST(Csv, QuotedFields) {
  auto t = parse_csv("a,b,c\n1,\"x, y\",\"he said \"\"hi\"\"\"\n2,\"multi\nline\",\r\n");
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][1], "x, y");
  EXPECT_EQ(t.rows[0][2], "he said \"hi\"");
  EXPECT_EQ(t.rows[1][1], "multi\nline");
  EXPECT_EQ(t.rows[1][2], "");
  EXPECT_EQ(t.index("c"), 2u);
  EXPECT_THROW(t.index("d"), Error);
}

TEST(Csv, Semicolons) {
  auto t = parse_csv("a;b\n1;2\n", ';');
  ASSERT_EQ(t.header.size(), 2u);
  EXPECT_EQ(t.rows[0][1], "2");
}

TEST(Csv, RaggedRowThrows) { EXPECT_THROW(parse_csv("a,b\n1,2,3\n"), Error); }

TEST(Csv, MissingFile) {
  try {
    read_csv("/nonexistent/table.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::io);
  }
}

TEST(Descriptor, RoundTrip) {
  auto d = DatasetDescriptor::load(kData + "/fixture/dataset.json");
  EXPECT_EQ(d.dataset_id, "fixture");
  EXPECT_EQ(d.columns.size(), 10u);
  ASSERT_TRUE(d.signals);
  EXPECT_EQ(d.signals->channels.size(), 2u);
  auto again = DatasetDescriptor::from_json(d.to_json(), "/");
  EXPECT_EQ(again.to_json(), d.to_json());
  EXPECT_EQ(*again.evaluation_time, "2025-01-01");
}

TEST(Descriptor, RowsFile) {
  auto dir = scratch("rows");
  auto j = DatasetDescriptor::load(kData + "/fixture/dataset.json").to_json();
  j["rows"] = "rows.txt";
  write_text_file(dir / "rows.txt", "3\n5\n7\n");
  auto d = DatasetDescriptor::from_json(j, dir);
  ASSERT_TRUE(d.rows);
  EXPECT_EQ(*d.rows, (std::vector<std::size_t>{3, 5, 7}));
  auto ds = load_dataset(d).dataset;
  EXPECT_EQ(ds.n_records(), 3u);
  EXPECT_EQ(ds.column("record_id").text(0), fixture().column("record_id").text(3));

  write_text_file(dir / "rows.txt", "3\nx\n");
  EXPECT_THROW(DatasetDescriptor::from_json(j, dir), Error);
  j["rows"] = json::array({1000});
  EXPECT_THROW(load_dataset(DatasetDescriptor::from_json(j, dir)), Error);
}

TEST(Descriptor, UnknownColumnThrows) {
  auto j = DatasetDescriptor::load(kData + "/fixture/dataset.json").to_json();
  j["columns"].push_back({{"name", "absent"}, {"vtype", "numerical"}});
  EXPECT_THROW(load_dataset(DatasetDescriptor::from_json(j, "/")), Error);
}

TEST(Signals, MissingFileWarns) {
  auto d = DatasetDescriptor::load(kData + "/fixture/dataset.json");
  auto t = read_csv(d.table_path);
  t.rows[0][t.index("file")] = "does_not_exist";
  auto loaded = build_dataset(d, t);
  EXPECT_FALSE(loaded.dataset.signals()[0].has_value());
  EXPECT_TRUE(loaded.dataset.signals()[1].has_value());
  EXPECT_FALSE(loaded.warnings.empty());
}

TEST(Signals, ReadsInterleavedFloat32) {
  auto dir = scratch("f32");
  std::vector<float> data = {1, 10, 2, 20, 3, 30};
  {
    std::ofstream f(dir / "r.f32", std::ios::binary);
    f.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(float)));
  }
  SignalSpec spec;
  spec.dir = dir;
  spec.sampling_hz = 250;
  spec.channels = {"a", "b"};
  auto b = read_signal(spec, "r");
  ASSERT_TRUE(b);
  EXPECT_EQ(b->n_channels(), 2u);
  EXPECT_EQ(b->samples[0], (std::vector<double>{1, 2, 3}));
  EXPECT_EQ(b->samples[1], (std::vector<double>{10, 20, 30}));
  EXPECT_EQ(b->sampling_hz, 250);
  EXPECT_FALSE(read_signal(spec, "nothing"));

  write_text_file(dir / "odd.f32", std::string(10, '\0'));
  EXPECT_THROW(read_signal(spec, "odd"), Error);
}

TEST(Signals, FixtureLoaded) {
  ASSERT_TRUE(fixture().has_signals());
  const auto& s = fixture().signals().front();
  ASSERT_TRUE(s);
  EXPECT_EQ(s->n_channels(), 2u);
  EXPECT_EQ(s->n_samples(), 250u);
  EXPECT_EQ(s->sampling_hz, 100);
}

TEST(Report, RunsSelectionAndRecordsFailures) {
  auto params = read_json_file(kData + "/fixture/params.json");
  auto rep = run_report(fixture(), ptbxl_selection(), params, 0, {"informative_dropout"}, "T");
  ASSERT_EQ(rep.results.size(), 17u);
  const auto& extra = rep.results.back();
  EXPECT_TRUE(extra.manual_extra);
  ASSERT_TRUE(extra.error_kind);
  EXPECT_EQ(*extra.error_kind, "not_implemented");
  for (std::size_t i = 0; i + 1 < rep.results.size(); ++i) EXPECT_FALSE(rep.results[i].error) << *rep.results[i].error;

  auto j = rep.to_json();
  EXPECT_TRUE(j["results"].back()["value"].is_null());
  EXPECT_EQ(j["results"].back()["error"]["kind"], "not_implemented");
  EXPECT_EQ(j["environment"]["generated_at"], "T");
}

TEST(Report, MissingPrerequisiteDoesNotAbort) {
  auto sel = ptbxl_selection();
  auto rep = run_report(fixture(), sel, json::object(), 0, {}, "T");
  // pearson without a target_positive and mmd without a grouping cannot run here
  std::size_t failed = 0;
  for (const auto& e : rep.results) failed += e.error ? 1 : 0;
  EXPECT_EQ(rep.results.size(), 16u);
  EXPECT_LT(failed, rep.results.size());
}

TEST(Report, MarkdownMatchesJson) {
  auto params = read_json_file(kData + "/fixture/params.json");
  auto rep = run_report(fixture(), ptbxl_selection(), params, 0, {}, "T");
  auto md = render_markdown(rep);
  for (const auto& e : rep.results) {
    auto v = format_value(e.result.value);
    EXPECT_NE(md.find(v), std::string::npos) << e.result.metric_id << " " << v;
  }
  std::size_t last = 0;
  for (const auto& [cluster, dims] : report_layout()) {
    auto pos = md.find("**" + cluster + "**");
    if (pos == std::string::npos) continue;
    EXPECT_GT(pos, last);
    last = pos;
  }
}

TEST(Report, Deterministic) {
  auto params = read_json_file(kData + "/fixture/params.json");
  auto a = run_report(fixture(), ptbxl_selection(), params, 3, {}, "T").to_json().dump(2);
  auto b = run_report(fixture(), ptbxl_selection(), params, 3, {}, "T").to_json().dump(2);
  EXPECT_EQ(a, b);
}

TEST(Report, EntryParamsMergeScopes) {
  json file = {{"range", {{"column", "age"}, {"scopes", {{"height", {{"column", "height"}}}}}}}};
  EXPECT_EQ(entry_params(file, "range", "", fixture()), json({{"column", "age"}}));
  EXPECT_EQ(entry_params(file, "range", "height", fixture())["column"], "height");
  EXPECT_EQ(entry_params(json::object(), "completeness", "measurements", fixture())["source"], "signals");
}

TEST(Report, FormatValue) {
  EXPECT_EQ(format_value(1.234), "1.23");
  EXPECT_EQ(format_value(std::vector<double>{1, 2.5}), "[1.00, 2.50]");
  EXPECT_EQ(format_value(std::map<std::string, double>{{"a", INFINITY}}), "a=inf");
}

TEST(Report, LayoutCoversAllDimensions) {
  std::size_t n = 0;
  for (const auto& [cluster, dims] : report_layout()) n += dims.size();
  EXPECT_EQ(n, 14u);
}
