#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

const std::string kData = DQM_TEST_DATA;

struct Run {
  int code = -1;
  std::string out;
};

Run dqm(const std::string& args) {
  std::string cmd = std::string(DQM_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("dqm_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

json load(const fs::path& p) {
  std::ifstream f(p);
  return json::parse(f);
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

/// Removes the two generation timestamps.
json strip_time(json j) {
  j["environment"].erase("generated_at");
  j["selection"].erase("generated_at");
  return j;
}

}  // namespace

TEST(Cli, Help) {
  auto r = dqm("--help");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("evaluate"), std::string::npos);
  EXPECT_NE(dqm("").code, 0);
}

TEST(Cli, CardsListAndShow) {
  auto r = dqm("cards list");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("hill_number"), std::string::npos);
  auto show = dqm("cards show cohens_kappa --format json");
  EXPECT_EQ(show.code, 0);
  EXPECT_EQ(json::parse(show.out)["id"], "cohens_kappa");
  EXPECT_NE(dqm("cards show no_such_metric").code, 0);
}

TEST(Cli, CardsExport) {
  auto dir = scratch("cards");
  ASSERT_EQ(dqm("cards export --format md --out " + q(dir)).code, 0);
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) n += e.path().extension() == ".md" ? 1 : 0;
  EXPECT_EQ(n, 60u);
}

TEST(Cli, SelectProfile) {
  auto dir = scratch("select");
  auto r = dqm("select --profile " + q(kData + "/ptbxl_profile.json") + " --out " + q(dir / "sel.json"));
  ASSERT_EQ(r.code, 0) << r.out;
  auto sel = load(dir / "sel.json");
  EXPECT_TRUE(sel.contains("generated_at"));
}

TEST(Cli, SelectStrictNamesQuestion) {
  auto dir = scratch("strict");
  {
    std::ofstream f(dir / "p.json");
    f << R"({"dimensions": ["currency"], "answers": {}})";
  }
  auto r = dqm("select --strict --profile " + q(dir / "p.json"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("currency"), std::string::npos) << r.out;
}

TEST(Cli, EvaluateAndDeterminism) {
  auto dir = scratch("eval");
  ASSERT_EQ(dqm("select --profile " + q(kData + "/ptbxl_profile.json") + " --out " + q(dir / "sel.json")).code, 0);
  std::string common = "evaluate --seed 5 --data " + q(kData + "/fixture/dataset.json") + " --selection " +
                       q(dir / "sel.json") + " --params " + q(kData + "/fixture/params.json") +
                       " --extra informative_dropout";
  auto a = dqm(common + " --out " + q(dir / "a.json") + " --markdown " + q(dir / "a.md"));
  ASSERT_EQ(a.code, 0) << a.out;
  EXPECT_NE(a.out.find("17 results, 1 failed"), std::string::npos) << a.out;
  EXPECT_TRUE(fs::exists(dir / "a.md"));
  ASSERT_EQ(dqm(common + " --out " + q(dir / "b.json")).code, 0);
  EXPECT_EQ(strip_time(load(dir / "a.json")).dump(), strip_time(load(dir / "b.json")).dump());
}

TEST(Cli, EvaluateLoadFailureExitsTwo) {
  auto dir = scratch("bad");
  ASSERT_EQ(dqm("select --profile " + q(kData + "/ptbxl_profile.json") + " --out " + q(dir / "sel.json")).code, 0);
  {
    std::ofstream f(dir / "d.json");
    f << R"({"dataset_id": "x", "table": {"path": "missing.csv"}, "columns": []})";
  }
  auto r = dqm("evaluate --data " + q(dir / "d.json") + " --selection " + q(dir / "sel.json") + " --out " +
               q(dir / "r.json"));
  EXPECT_EQ(r.code, 2) << r.out;
}

TEST(Cli, SubsetThenCompare) {
  auto dir = scratch("subset");
  auto r = dqm("subset --data " + q(kData + "/fixture/dataset.json") +
               " --recipe class_imbalance:n_norm=3,n_other=30,seed=2 --out " + q(dir));
  ASSERT_EQ(r.code, 0) << r.out;
  auto desc = load(dir / "dataset.json");
  EXPECT_EQ(desc["rows"], "rows.txt");
  EXPECT_EQ(desc["subset"]["kind"], "class_imbalance");

  auto c = dqm("compare --data " + q(kData + "/fixture/dataset.json") + " " + q(dir / "dataset.json") +
               " --metrics dataset_size,generalized_imbalance_ratio --out " + q(dir / "cmp.json"));
  ASSERT_EQ(c.code, 0) << c.out;
  auto cmp = load(dir / "cmp.json");
  EXPECT_EQ(cmp["results"][0]["delta"], -27.0);
  EXPECT_GT(cmp["results"][1]["delta"].get<double>(), 0.0);

  auto too_many = dqm("subset --data " + q(kData + "/fixture/dataset.json") +
                      " --recipe sex_imbalance:n_male=1000 --out " + q(dir / "x"));
  EXPECT_EQ(too_many.code, 2);
}

TEST(Cli, HarnessSkipsWithoutData) {
  auto r = dqm("ptbxl-harness --root " + q(scratch("noptb")));
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("skipped"), std::string::npos);
}
