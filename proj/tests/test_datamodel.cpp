#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "dqm/error.hpp"
#include "test_util.hpp"

using namespace dqm;
using dqm::test::Col;
using dqm::test::make_dataset;

TEST(ColumnSample, DropsMissingAndCountsThem) {
  auto ds = make_dataset({{"x", VarType::numerical, {"1.0", "NA", "3.0"}}});
  auto s = column_sample(ds, "x");
  EXPECT_EQ(s.values, (std::vector<double>{1.0, 3.0}));
  EXPECT_EQ(s.dropped, 1u);
}

TEST(ColumnSample, EmptyAndAllMissing) {
  auto empty = make_dataset({{"x", VarType::numerical, {}}});
  EXPECT_TRUE(column_sample(empty, "x").empty());
  EXPECT_EQ(column_sample(empty, "x").dropped, 0u);
  auto missing = make_dataset({{"x", VarType::numerical, {"", "", "NA", "nan", ""}}});
  EXPECT_TRUE(column_sample(missing, "x").empty());
  EXPECT_EQ(column_sample(missing, "x").dropped, 5u);
}

TEST(ColumnSample, RejectsUnknownAndCategorical) {
  auto ds = make_dataset({{"sex", VarType::categorical, {"M", "F"}}});
  EXPECT_THROW(column_sample(ds, "nope"), Error);
  EXPECT_THROW(column_sample(ds, "sex"), Error);
}

TEST(ColumnSample, OrdinalUsesCodes) {
  auto ds = make_dataset({{"grade", VarType::ordinal, {"low", "high", "mid"}, Role::feature, {"low", "mid", "high"}}});
  EXPECT_EQ(column_sample(ds, "grade").values, (std::vector<double>{0, 2, 1}));
}

TEST(GroupBy, PartitionsRecords) {
  auto ds = make_dataset({{"sex", VarType::categorical, {"M", "F", "M"}}});
  auto g = group_by(ds, "sex");
  ASSERT_EQ(g.groups.size(), 2u);
  EXPECT_EQ(g.find("M")->records, (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(g.find("F")->records, (std::vector<std::size_t>{1}));
}

TEST(GroupBy, SingleCategoryAndMissing) {
  auto same = make_dataset({{"s", VarType::categorical, {"a", "a", "a"}}});
  EXPECT_EQ(group_by(same, "s").groups.size(), 1u);
  EXPECT_EQ(group_by(same, "s").groups[0].records.size(), 3u);
  auto ds = make_dataset({{"s", VarType::categorical, {"a", "", "b", "a"}}});
  auto g = group_by(ds, "s");
  std::size_t covered = 0;
  for (const auto& grp : g.groups) covered += grp.records.size();
  EXPECT_EQ(covered, 3u);
  EXPECT_EQ(g.missing, (std::vector<std::size_t>{1}));
}

TEST(GroupBy, NumericalColumnIsAnError) {
  auto ds = make_dataset({{"x", VarType::numerical, {"1", "2"}}});
  EXPECT_THROW(group_by(ds, "x"), Error);
}

TEST(Histogram, EqualWidthTwoBins) {
  Sample s{{0, 0.5, 1}, 0};
  auto h = histogram(s, Binning::equal_width(2));
  EXPECT_EQ(h.counts, (std::vector<double>{2, 1}));
  EXPECT_EQ(h.edges, (std::vector<double>{0, 0.5, 1}));
}

TEST(Histogram, ConstantSampleWarns) {
  Sample s{std::vector<double>(20, 3.0), 0};
  auto h = histogram(s, Binning::equal_width(10));
  EXPECT_EQ(std::count_if(h.counts.begin(), h.counts.end(), [](double c) { return c > 0; }), 1);
  EXPECT_FALSE(h.warnings.empty());
}

TEST(Histogram, QuantileBinsMatchSortOracle) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  Sample s;
  for (int i = 0; i < 1000; ++i) s.values.push_back(u(rng));
  auto h = histogram(s, Binning::quantile(4));
  ASSERT_EQ(h.size(), 4u);
  for (double c : h.counts) EXPECT_NEAR(c, 250, 1);
}

TEST(Histogram, RejectsZeroBins) {
  Sample s{{1, 2}, 0};
  EXPECT_THROW(histogram(s, Binning::equal_width(0)), Error);
}

TEST(Histogram, PreservesMass) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    Sample s;
    int size = 1 + trial * 7;
    for (int i = 0; i < size; ++i) s.values.push_back(n(rng));
    for (auto b : {Binning::equal_width(1 + trial % 12), Binning::quantile(1 + trial % 5)}) {
      auto h = histogram(s, b);
      EXPECT_DOUBLE_EQ(h.total(), static_cast<double>(size));
    }
  }
}

TEST(Dataset, CellCountInvariantAndGroupPartition) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    std::size_t n = rng() % 40;
    std::vector<std::string> a, b;
    for (std::size_t i = 0; i < n; ++i) {
      a.push_back(rng() % 4 == 0 ? "" : std::to_string(rng() % 100));
      b.push_back(rng() % 5 == 0 ? "NA" : std::string(1, static_cast<char>('a' + rng() % 3)));
    }
    auto ds = make_dataset({{"a", VarType::numerical, a}, {"b", VarType::categorical, b}});
    std::size_t cells = 0;
    for (const auto& c : ds.columns()) cells += c.size();
    EXPECT_EQ(cells, ds.n_records() * ds.n_columns());
    auto g = group_by(ds, "b");
    std::vector<std::size_t> all = g.missing;
    for (const auto& grp : g.groups) all.insert(all.end(), grp.records.begin(), grp.records.end());
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> expect(n);
    for (std::size_t i = 0; i < n; ++i) expect[i] = i;
    EXPECT_EQ(all, expect);
  }
}

TEST(Dataset, RejectsDuplicateNamesAndMissingOrdinalOrder) {
  EXPECT_THROW(make_dataset({{"x", VarType::numerical, {"1"}}, {"x", VarType::numerical, {"2"}}}), Error);
  EXPECT_THROW(make_dataset({{"g", VarType::ordinal, {"a"}}}), Error);
  EXPECT_THROW(make_dataset({{"g", VarType::ordinal, {"z"}, Role::feature, {"a", "b"}}}), Error);
}

TEST(Dataset, RejectsTwoTargets) {
  EXPECT_THROW(make_dataset({{"y1", VarType::categorical, {"a"}, Role::target},
                             {"y2", VarType::categorical, {"b"}, Role::target}}),
               Error);
}

TEST(Dataset, SelectRowsKeepsOrder) {
  auto ds = make_dataset({{"x", VarType::numerical, {"10", "20", "30"}}});
  std::vector<std::size_t> rows{2, 0};
  auto sub = ds.select_rows(rows);
  EXPECT_EQ(column_sample(sub, "x").values, (std::vector<double>{30, 10}));
}

TEST(Datetime, ParsesSupportedForms) {
  EXPECT_EQ(parse_datetime("1970-01-02"), 86400);
  EXPECT_EQ(parse_datetime("1970-01-01 00:01:00"), 60);
  EXPECT_EQ(parse_datetime("1970-01-01T00:00:10Z"), 10);
  EXPECT_EQ(parse_datetime("1960-01-01"), -315619200);
  EXPECT_EQ(parse_datetime("12345"), 12345);
  EXPECT_FALSE(parse_datetime("yesterday").has_value());
}

TEST(SignalBlock, ValidatesShape) {
  auto ok = dqm::test::signal({{1, 2}, {3, 4}}, 100);
  EXPECT_NO_THROW(ok.validate());
  auto ragged = dqm::test::signal({{1, 2}, {3}}, 100);
  EXPECT_THROW(ragged.validate(), Error);
  auto rate = dqm::test::signal({{1}}, 0);
  EXPECT_THROW(rate.validate(), Error);
}

TEST(Ratings, SharedLabelSpaceForCategoricalRaters) {
  auto ds = make_dataset({{"r1", VarType::categorical, {"a", "b", ""}, Role::annotation},
                          {"r2", VarType::categorical, {"b", "c", "a"}, Role::annotation}});
  auto m = ratings_from_columns(ds, {"r1", "r2"});
  EXPECT_EQ(m.items, 3u);
  EXPECT_EQ(m.raters, 2u);
  EXPECT_EQ(m.labels, (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_FALSE(m.at(2, 0).has_value());
  EXPECT_EQ(*m.at(1, 1), 2.0);
}
