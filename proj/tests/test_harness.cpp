#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "dqm/error.hpp"
#include "dqm/harness.hpp"
#include "dqm/structure_metrics.hpp"
#include "dqm/selection.hpp"

using namespace dqm;
using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

const std::string kData = DQM_TEST_DATA;

const Dataset& fixture() {
  static const Dataset ds = load_dataset(DatasetDescriptor::load(kData + "/fixture/dataset.json")).dataset;
  return ds;
}

std::size_t count_label(const Dataset& ds, const std::string& col, const std::vector<std::size_t>& rows,
                        const std::string& label) {
  std::size_t n = 0;
  for (auto r : rows) n += ds.column(col).text(r) == label ? 1 : 0;
  return n;
}

}  // namespace

TEST(Recipe, Defaults) {
  auto r = SubsetRecipe::parse("sex_imbalance");
  EXPECT_EQ(r.column, "sex");
  EXPECT_EQ(r.n_a, 4000u);
  EXPECT_EQ(r.n_b, 1000u);
  EXPECT_EQ(r.seed, 0u);
  auto d = SubsetRecipe::parse("device_filter");
  EXPECT_EQ(d.device, "CS-12");
  EXPECT_TRUE(d.prefix_match);
  auto c = SubsetRecipe::parse("class_imbalance");
  EXPECT_EQ(c.label_a, "NORM");
  EXPECT_EQ(c.n_a, 250u);
  EXPECT_EQ(c.n_b, 4750u);
}

TEST(Recipe, Options) {
  auto r = SubsetRecipe::parse("sex_imbalance:n_male=10,n_female=5,seed=9");
  EXPECT_EQ(r.n_a, 10u);
  EXPECT_EQ(r.n_b, 5u);
  EXPECT_EQ(r.seed, 9u);
  EXPECT_EQ(SubsetRecipe::parse(r.to_json()["kind"].get<std::string>()).kind, r.kind);
  EXPECT_FALSE(SubsetRecipe::parse("device_filter:match=exact").prefix_match);
}

TEST(Recipe, BadInput) {
  EXPECT_THROW(SubsetRecipe::parse("nope"), Error);
  EXPECT_THROW(SubsetRecipe::parse("sex_imbalance:bogus=1"), Error);
  EXPECT_THROW(SubsetRecipe::parse("sex_imbalance:n_male=-3"), Error);
  EXPECT_THROW(SubsetRecipe::parse("sex_imbalance:n_male"), Error);
  EXPECT_THROW(SubsetRecipe::parse("device_filter:match=fuzzy"), Error);
}

TEST(Subset, ExactCountsWithoutRepeats) {
  auto r = SubsetRecipe::parse("sex_imbalance:n_male=30,n_female=5,seed=4");
  auto rows = subset_rows(fixture(), r);
  EXPECT_EQ(rows.size(), 35u);
  EXPECT_TRUE(std::is_sorted(rows.begin(), rows.end()));
  EXPECT_EQ(std::set<std::size_t>(rows.begin(), rows.end()).size(), rows.size());
  EXPECT_EQ(count_label(fixture(), "sex", rows, "0"), 30u);
  EXPECT_EQ(count_label(fixture(), "sex", rows, "1"), 5u);
}

TEST(Subset, Reproducible) {
  auto r = SubsetRecipe::parse("sex_imbalance:n_male=20,n_female=10,seed=11");
  EXPECT_EQ(subset_rows(fixture(), r), subset_rows(fixture(), r));
  auto other = r;
  other.seed = 12;
  EXPECT_NE(subset_rows(fixture(), r), subset_rows(fixture(), other));
}

TEST(Subset, InsufficientStratum) {
  try {
    subset_rows(fixture(), SubsetRecipe::parse("sex_imbalance:n_male=41,n_female=1"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::insufficient_data);
  }
}

TEST(Subset, DeviceMatch) {
  auto prefix = subset_rows(fixture(), SubsetRecipe::parse("device_filter"));
  auto exact = subset_rows(fixture(), SubsetRecipe::parse("device_filter:match=exact"));
  EXPECT_EQ(prefix.size(), 36u);
  EXPECT_EQ(exact.size(), 24u);
  EXPECT_THROW(subset_rows(fixture(), SubsetRecipe::parse("device_filter:device=XX")), Error);
}

TEST(Subset, ClassImbalanceUsesTargetRole) {
  auto rows = subset_rows(fixture(), SubsetRecipe::parse("class_imbalance:n_norm=3,n_other=30"));
  EXPECT_EQ(count_label(fixture(), "diagnosis", rows, "NORM"), 3u);
  EXPECT_EQ(rows.size(), 33u);
}

TEST(Compare, SchemaMismatchNamesColumn) {
  auto desc = DatasetDescriptor::load(kData + "/fixture/dataset.json");
  auto j = desc.to_json();
  j["columns"][2]["vtype"] = "categorical";
  auto other = load_dataset(DatasetDescriptor::from_json(j, "/")).dataset;
  try {
    check_same_schema(fixture(), other);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("age"), std::string::npos);
  }
  EXPECT_NO_THROW(check_same_schema(fixture(), fixture()));
}

TEST(Compare, SelfHasZeroDeltas) {
  auto params = read_json_file(kData + "/fixture/params.json");
  auto out = compare_datasets(fixture(), fixture(), {"dataset_size", "generalized_imbalance_ratio", "range"},
                              params, 0);
  ASSERT_EQ(out["results"].size(), 3u);
  EXPECT_EQ(out["results"][0]["delta"], 0.0);
  EXPECT_EQ(out["results"][1]["delta"], 0.0);
  // range needs a column, so both sides carry the error and no delta
  EXPECT_TRUE(out["results"][2]["a"].contains("error"));
  EXPECT_TRUE(out["results"][2]["delta"].is_null());
}

TEST(Compare, ClassImbalanceRaisesRatio) {
  auto rows = subset_rows(fixture(), SubsetRecipe::parse("class_imbalance:n_norm=2,n_other=30"));
  auto sub = fixture().select_rows(rows);
  auto out = compare_datasets(fixture(), sub, {"generalized_imbalance_ratio"}, json::object(), 0);
  EXPECT_GT(out["results"][0]["delta"].get<double>(), 0.0);
}

TEST(Profile, FileMatchesBuiltin) {
  EXPECT_EQ(read_json_file(kData + "/ptbxl_profile.json"), ptbxl_profile());
}

TEST(Profile, SelectsSixteen) {
  auto sel = select_all(UseCaseProfile::from_json(ptbxl_profile()));
  EXPECT_EQ(sel.entries().size(), 16u);
}

TEST(Harness, SkippedWithoutData) {
  HarnessOptions o;
  o.root = fs::temp_directory_path() / "dqm_no_ptbxl_here";
  auto out = ptbxl_harness(o);
  EXPECT_TRUE(out.skipped);
  EXPECT_TRUE(out.passed());
  EXPECT_NE(out.markdown().find("skipped"), std::string::npos);
}

TEST(Harness, SuperclassFromHighestLikelihood) {
  auto root = fs::temp_directory_path() / "dqm_mini_ptbxl";
  fs::remove_all(root);
  fs::create_directories(root);
  std::string header =
      "ecg_id,patient_id,age,sex,height,weight,nurse,site,device,recording_date,report,scp_codes,heart_axis,"
      "infarction_stadium1,infarction_stadium2,validated_by,second_opinion,initial_autogenerated_report,"
      "validated_by_human,baseline_drift,static_noise,burst_noise,electrodes_problems,extra_beats,pacemaker,"
      "strat_fold,filename_lr,filename_hr\n";
  auto row = [](int id, const std::string& codes) {
    return std::to_string(id) + "," + std::to_string(100 + id) + ",50,0,,,,1,CS-12 E,1990-01-01 10:00:00,x,\"" +
           codes + "\",,,,,False,False,True,,,,,,,1,lr/" + std::to_string(id) + ",hr/" + std::to_string(id) + "\n";
  };
  write_text_file(root / "ptbxl_database.csv",
                  header + row(1, "{'NORM': 100.0, 'SR': 0.0}") + row(2, "{'IMI': 50.0, 'NDT': 80.0}") +
                      row(3, "{'SR': 0.0}"));
  write_text_file(root / "scp_statements.csv",
                  ",description,diagnostic_class\nNORM,normal,NORM\nIMI,inferior,MI\nNDT,non-diag,STTC\nSR,sinus,\n");
  HarnessOptions o;
  o.root = root;
  auto [desc, table] = ptbxl_descriptor(o);
  auto ds = build_dataset(desc, table).dataset;
  const auto& sc = ds.column("superclass");
  EXPECT_EQ(sc.text(0), "NORM");
  EXPECT_EQ(sc.text(1), "STTC");
  EXPECT_TRUE(sc.is_missing(2));
  EXPECT_EQ(ds.column_with_role(Role::target)->name(), "superclass");
  EXPECT_EQ(granularity(ds, {Role::feature, Role::patient_id, Role::timestamp}), 26u);
  EXPECT_FALSE(desc.signals);
}
