#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dqm/error.hpp"
#include "dqm/measurement_metrics.hpp"
#include "test_util.hpp"

using namespace dqm;
using dqm::test::Col;
using dqm::test::counts;
using dqm::test::make_dataset;

namespace {

std::pair<double, double> sampen_counts_oracle(const std::vector<double>& x, int m, double r) {
  std::size_t n = x.size(), nt = n - static_cast<std::size_t>(m);
  double a = 0, b = 0;
  for (std::size_t i = 0; i < nt; ++i)
    for (std::size_t j = i + 1; j < nt; ++j) {
      double d = 0;
      for (int k = 0; k < m; ++k) d = std::max(d, std::abs(x[i + k] - x[j + k]));
      if (d > r) continue;
      b += 1;
      if (std::abs(x[i + m] - x[j + m]) <= r) a += 1;
    }
  return {a, b};
}

RatingsMatrix from_confusion(const std::vector<std::vector<int>>& table) {
  std::vector<std::vector<std::optional<double>>> rows;
  for (std::size_t i = 0; i < table.size(); ++i)
    for (std::size_t j = 0; j < table[i].size(); ++j)
      for (int c = 0; c < table[i][j]; ++c) rows.push_back({double(i), double(j)});
  return RatingsMatrix::from_rows(rows);
}

RatingsMatrix from_values(const std::vector<std::vector<double>>& rows) {
  std::vector<std::vector<std::optional<double>>> r;
  for (const auto& row : rows) r.emplace_back(row.begin(), row.end());
  return RatingsMatrix::from_rows(r);
}

double fleiss_oracle(const std::vector<std::vector<double>>& rows, int k) {
  double n = static_cast<double>(rows.size()), raters = static_cast<double>(rows[0].size());
  std::vector<double> pj(static_cast<std::size_t>(k), 0.0);
  double pbar = 0;
  for (const auto& row : rows) {
    std::vector<double> nij(static_cast<std::size_t>(k), 0.0);
    for (double v : row) nij[static_cast<std::size_t>(v)] += 1;
    double s = 0;
    for (int j = 0; j < k; ++j) {
      s += nij[j] * (nij[j] - 1);
      pj[j] += nij[j] / (n * raters);
    }
    pbar += s / (raters * (raters - 1)) / n;
  }
  double pe = 0;
  for (double p : pj) pe += p * p;
  return (pbar - pe) / (1 - pe);
}

double nominal_alpha_oracle(const std::vector<std::vector<std::optional<double>>>& rows) {
  // coincidence matrix over pairable values
  std::map<std::pair<double, double>, double> o;
  std::map<double, double> nc;
  double total = 0;
  for (const auto& row : rows) {
    std::vector<double> v;
    for (const auto& c : row)
      if (c) v.push_back(*c);
    if (v.size() < 2) continue;
    double mu = static_cast<double>(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = 0; j < v.size(); ++j)
        if (i != j) o[{v[i], v[j]}] += 1 / (mu - 1);
  }
  for (const auto& [k, val] : o) {
    nc[k.first] += val;
    total += val;
  }
  double d_o = 0, d_e = 0;
  for (const auto& [k, val] : o)
    if (k.first != k.second) d_o += val;
  for (const auto& [c, a] : nc)
    for (const auto& [e, b] : nc)
      if (c != e) d_e += a * b;
  return 1 - (total - 1) * d_o / d_e;
}

}  // namespace

TEST(Shannon, Values) {
  EXPECT_DOUBLE_EQ(shannon_entropy(counts({10})), 0.0);
  EXPECT_NEAR(shannon_entropy(counts({3, 3, 3, 3})), std::log(4.0), 1e-12);
  EXPECT_NEAR(shannon_entropy(counts({8, 2})), 0.5004, 1e-4);
  EXPECT_NEAR(shannon_entropy(counts({1, 1}), 2.0), 1.0, 1e-12);
}

TEST(SampleEntropy, ConstantSeriesIsZero) {
  std::vector<double> x(100, 4.2);
  EXPECT_EQ(*sample_entropy(x).value, 0.0);
}

TEST(SampleEntropy, CountsMatchQuadraticOracle) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 30; ++t) {
    std::vector<double> x(50 + t * 5);
    for (auto& v : x) v = std::round(nd(rng) * 4) / 4;  // ties at the tolerance boundary
    int m = 1 + t % 3;
    auto res = sample_entropy(x, {m, 0.2});
    double mean = 0, var = 0;
    for (double v : x) mean += v / static_cast<double>(x.size());
    for (double v : x) var += (v - mean) * (v - mean) / static_cast<double>(x.size());
    auto [a, b] = sampen_counts_oracle(x, m, 0.2 * std::sqrt(var));
    EXPECT_DOUBLE_EQ(res.a, a);
    EXPECT_DOUBLE_EQ(res.b, b);
    if (a > 0) EXPECT_NEAR(*res.value, -std::log(a / b), 1e-12);
  }
}

TEST(SampleEntropy, NoiseExceedsSine) {
  std::vector<double> sine(2000);
  for (std::size_t i = 0; i < sine.size(); ++i) sine[i] = std::sin(2 * M_PI * static_cast<double>(i) / 50.0);
  double s = *sample_entropy(sine).value;
  for (int seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    std::vector<double> noise(2000);
    for (auto& v : noise) v = nd(rng);
    EXPECT_GT(*sample_entropy(noise).value, s);
  }
}

TEST(SampleEntropy, UndefinedWithoutMatches) {
  std::vector<double> x{0, 10, 20, 30, 40};
  auto r = sample_entropy(x);
  EXPECT_FALSE(r.value.has_value());
  EXPECT_FALSE(r.warnings.empty());
  EXPECT_THROW(sample_entropy(std::vector<double>{1, 2}), Error);
}

TEST(LodLoq, Values) {
  std::vector<double> same{2, 2, 2};
  auto z = lod_loq(same);
  EXPECT_DOUBLE_EQ(z.lod, 2.0);
  EXPECT_DOUBLE_EQ(z.loq, 2.0);
  std::vector<double> blanks{0.9, 1.0, 1.1};  // mean 1, sd 0.1
  auto r = lod_loq(blanks);
  EXPECT_NEAR(r.lod, 1.33, 1e-12);
  EXPECT_NEAR(r.loq, 2.0, 1e-12);
  EXPECT_GE(r.loq, r.lod);
}

TEST(BlandAltman, Values) {
  std::vector<double> a{1, 3, 5}, b{2, 3, 4};
  EXPECT_NEAR(bland_altman_cr(a, b), 1.96, 1e-12);
  EXPECT_DOUBLE_EQ(bland_altman_cr(a, a), 0.0);
}

TEST(Repeatability, Values) {
  RepeatedMeasures same{{{"s1", {3, 3, 3}}, {"s2", {5, 5}}}};
  EXPECT_DOUBLE_EQ(repeatability_cv(same), 0.0);
  RepeatedMeasures one{{{"s1", {9, 11}}}};
  EXPECT_NEAR(repeatability_cv(one), std::sqrt(2.0) / 10.0, 1e-12);
  RepeatedMeasures two{{{"a", {9, 11, 10}}, {"b", {20, 24}}}};
  RepeatedMeasures scaled{{{"a", {27, 33, 30}}, {"b", {60, 72}}}};
  EXPECT_NEAR(repeatability_cv(two), repeatability_cv(scaled), 1e-12);
}

TEST(Reproducibility, AnovaOracle) {
  std::vector<double> v{1, 2, 3, 5, 6, 7};
  std::vector<std::string> c{"x", "x", "x", "y", "y", "y"};
  auto r = reproducibility_variance(v, c);
  // within: each group variance 1 -> MSw 1; between: means 2 and 6, MSb = 3 * ((2-4)^2 + (6-4)^2) = 24
  EXPECT_NEAR(r.repeatability, 1.0, 1e-12);
  EXPECT_NEAR(r.between, (24.0 - 1.0) / 3.0, 1e-12);
  EXPECT_NEAR(r.reproducibility, 1.0 + 23.0 / 3.0, 1e-12);
  EXPECT_TRUE(r.balanced);
  std::vector<double> flat(6, 2.0);
  auto z = reproducibility_variance(flat, c);
  EXPECT_DOUBLE_EQ(z.reproducibility, 0.0);
  // s_L^2 is clipped at zero when groups are closer than the noise allows
  std::vector<double> w{1, 5, 3, 2, 4, 3};
  auto clipped = reproducibility_variance(w, c);
  EXPECT_GE(clipped.between, 0.0);
  EXPECT_GE(clipped.reproducibility, clipped.repeatability);
}

TEST(InstrumentError, Values) {
  std::vector<double> ref{1, 2, 3, 4};
  auto same = instrument_error(ref, ref);
  EXPECT_DOUBLE_EQ(same.systematic, 0.0);
  EXPECT_DOUBLE_EQ(same.random, 0.0);
  std::vector<double> shifted{1.5, 2.5, 3.5, 4.5};
  auto s = instrument_error(shifted, ref);
  EXPECT_DOUBLE_EQ(s.systematic, 0.5);
  EXPECT_NEAR(s.random, 0.0, 1e-12);
  std::vector<double> noisy{1.2, 2.6, 3.4, 4.8};  // residuals .2 .6 .4 .8
  auto n = instrument_error(noisy, ref);
  EXPECT_NEAR(n.systematic, 0.5, 1e-12);
  EXPECT_NEAR(n.random, std::sqrt((0.09 + 0.01 + 0.01 + 0.09) / 3), 1e-12);
}

TEST(CohensKappa, HandTable) {
  EXPECT_NEAR(cohens_kappa(from_confusion({{20, 5}, {10, 15}})), 0.4, 1e-12);
}

TEST(CohensKappa, PerfectAndWeighted) {
  EXPECT_DOUBLE_EQ(cohens_kappa(from_confusion({{10, 0, 0}, {0, 5, 0}, {0, 0, 7}})), 1.0);
  // linear weights, hand computed on a 3-category table
  std::vector<std::vector<int>> t{{5, 2, 0}, {1, 6, 2}, {0, 1, 3}};
  double n = 20, po = 0, pe = 0;
  double row[3] = {7, 9, 4}, col[3] = {6, 9, 5};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double w = 1 - std::abs(i - j) / 2.0;
      po += w * t[i][j] / n;
      pe += w * row[i] * col[j] / (n * n);
    }
  EXPECT_NEAR(cohens_kappa(from_confusion(t), KappaWeights::linear), (po - pe) / (1 - pe), 1e-12);
}

TEST(CohensKappa, RequiresTwoRaters) {
  EXPECT_THROW(cohens_kappa(from_values({{1, 1, 1}, {0, 0, 1}})), Error);
}

TEST(FleissKappa, UnanimousAndOracle) {
  EXPECT_DOUBLE_EQ(fleiss_kappa(from_values({{0, 0, 0}, {1, 1, 1}, {2, 2, 2}})), 1.0);
  std::vector<std::vector<double>> rows{{0, 0, 1, 1}, {1, 1, 1, 1}, {0, 2, 2, 2}, {0, 0, 0, 1}, {2, 2, 1, 0}};
  EXPECT_NEAR(fleiss_kappa(from_values(rows)), fleiss_oracle(rows, 3), 1e-12);
}

TEST(KendallsW, Values) {
  EXPECT_DOUBLE_EQ(kendalls_w(from_values({{1, 1, 1}, {2, 2, 2}, {3, 3, 3}, {4, 4, 4}})), 1.0);
  // reversed rankings from two raters: rank sums are all equal, so S = 0
  EXPECT_NEAR(kendalls_w(from_values({{1, 3}, {2, 2}, {3, 1}})), 0.0, 1e-12);
  // two raters: W = (rho_s + 1) / 2
  auto w = kendalls_w(from_values({{1, 2}, {2, 1}, {3, 3}, {4, 5}, {5, 4}}));
  double rho = 1 - 6.0 * 4 / (5 * 24);
  EXPECT_NEAR(w, (rho + 1) / 2, 1e-12);
}

TEST(Krippendorff, NominalOracle) {
  EXPECT_DOUBLE_EQ(krippendorff_alpha(from_values({{0, 0}, {1, 1}, {2, 2}})), 1.0);
  std::vector<std::vector<std::optional<double>>> rows{{0.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}, {1.0, 1.0}};
  EXPECT_NEAR(krippendorff_alpha(RatingsMatrix::from_rows(rows)), nominal_alpha_oracle(rows), 1e-12);
  std::vector<std::vector<std::optional<double>>> missing{
      {0.0, 0.0, std::nullopt}, {1.0, 1.0, 0.0}, {2.0, std::nullopt, 2.0}, {std::nullopt, 1.0, std::nullopt}};
  EXPECT_NEAR(krippendorff_alpha(RatingsMatrix::from_rows(missing)), nominal_alpha_oracle(missing), 1e-12);
}

TEST(Krippendorff, SystematicDisagreementIsNegative) {
  EXPECT_LT(krippendorff_alpha(from_values({{0, 1}, {1, 0}, {0, 1}, {1, 0}})), 0.0);
}

TEST(Krippendorff, IntervalMatchesIccLikeOrdering) {
  auto close = from_values({{1, 1.1}, {2, 2.1}, {3, 2.9}, {4, 4.2}});
  auto far = from_values({{1, 3}, {2, 1}, {3, 4}, {4, 2}});
  EXPECT_GT(krippendorff_alpha(close, AlphaLevel::interval), krippendorff_alpha(far, AlphaLevel::interval));
}

TEST(Overlap, Values) {
  std::vector<std::uint8_t> a{1, 1, 0, 0}, b{0, 1, 1, 0}, c{0, 0, 1, 1};
  EXPECT_DOUBLE_EQ(overlap(a, a, OverlapKind::dice), 1.0);
  EXPECT_DOUBLE_EQ(overlap(a, a, OverlapKind::iou), 1.0);
  EXPECT_DOUBLE_EQ(overlap(a, c, OverlapKind::dice), 0.0);
  EXPECT_DOUBLE_EQ(overlap(a, c, OverlapKind::iou), 0.0);
  double d = overlap(a, b, OverlapKind::dice), j = overlap(a, b, OverlapKind::iou);
  EXPECT_DOUBLE_EQ(d, 0.5);
  EXPECT_NEAR(j, 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(j, d / (2 - d), 1e-12);
}

TEST(Completeness, Values) {
  auto ds = make_dataset({{"x", VarType::numerical, {"1", ""}}, {"y", VarType::categorical, {"a", "b"}}});
  EXPECT_DOUBLE_EQ(completeness(ds), 0.75);
  EXPECT_DOUBLE_EQ(completeness(ds, {"y"}), 1.0);
}

TEST(Completeness, PatientLevel) {
  auto ds = make_dataset({{"pid", VarType::identifier, {"p1", "p1", "p2", "p2"}, Role::patient_id},
                          {"hr", VarType::numerical, {"", "60", "", ""}},
                          {"bp", VarType::numerical, {"", "", "", ""}}});
  EXPECT_DOUBLE_EQ(patient_level_completeness(ds, "hr"), 0.5);
  EXPECT_DOUBLE_EQ(patient_level_completeness(ds, "bp"), 0.0);
}

TEST(Completeness, MeasurementSignals) {
  std::vector<std::optional<SignalBlock>> sig{dqm::test::signal({{1, 2}}, 100), std::nullopt,
                                              dqm::test::signal({{1, NAN}}, 100)};
  auto ds = make_dataset({{"pid", VarType::identifier, {"a", "b", "c"}, Role::patient_id}}, sig);
  EXPECT_DOUBLE_EQ(measurement_completeness(ds), (1.0 + 0.0 + 0.5) / 3.0);
  EXPECT_DOUBLE_EQ(patient_level_completeness(ds, "measurements"), 2.0 / 3.0);
}

TEST(Completeness, RecordLevel) {
  auto ds = make_dataset({{"x", VarType::numerical, {"1", "", "3"}}, {"y", VarType::numerical, {"1", "2", "3"}}});
  EXPECT_DOUBLE_EQ(record_completeness(ds, {"x", "y"}), 2.0 / 3.0);
  Warnings w;
  EXPECT_DOUBLE_EQ(record_completeness(ds, {}, &w), 1.0);
  EXPECT_FALSE(w.empty());
}
