#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "dqm/error.hpp"
#include "dqm/harness.hpp"
#include "dqm/registry.hpp"
#include "dqm/selection.hpp"

using namespace dqm;
using json = nlohmann::ordered_json;

namespace {

UseCaseProfile profile(const json& answers) { return UseCaseProfile::from_json(json{{"answers", answers}}); }

std::vector<std::string> metric_ids(const DimensionSelection& d) {
  std::vector<std::string> out;
  for (const auto& m : d.metrics) out.push_back(m.metric_id);
  return out;
}

void collect(const DecisionTree& t, std::set<std::string>& out) {
  for (const auto& l : t.leaves) {
    out.insert(l.metrics.begin(), l.metrics.end());
    for (const auto& s : l.subtrees) collect(builtin_tree(s.tree), out);
  }
}

}  // namespace

TEST(Trees, SixteenInOrder) {
  const auto& trees = builtin_trees();
  ASSERT_EQ(trees.size(), 16u);
  for (std::size_t i = 0; i < 14; ++i) EXPECT_EQ(trees[i].dimension, kDimensions[i]);
  EXPECT_EQ(trees[14].dimension, "distribution_metrics");
  EXPECT_EQ(trees[15].dimension, "correlation_coefficients");
  EXPECT_TRUE(trees[14].is_subtree());
  EXPECT_FALSE(trees[0].is_subtree());
}

TEST(Trees, RootQuestions) {
  const auto& acc = builtin_tree("accuracy");
  EXPECT_EQ(acc.node(acc.root)->text, "Does a ground truth exist?");
  const auto& nl = builtin_tree("noisy_labels");
  EXPECT_EQ(nl.node(nl.root)->text, "How many annotators have labeled your dataset?");
}

TEST(Trees, CurrencyBranches) {
  auto walk = [](const json& a) { return metric_ids(traverse(builtin_tree("currency"), profile(a))); };
  EXPECT_EQ(walk({{"expiration_date", "yes"}, {"decay_shape", "linear"}}), std::vector<std::string>{"currency_li"});
  EXPECT_EQ(walk({{"expiration_date", "yes"}, {"decay_shape", "polynomial"}}),
            std::vector<std::string>{"currency_ballou"});
  EXPECT_EQ(walk({{"expiration_date", "no"}, {"update_frequency_known", "yes"}}),
            std::vector<std::string>{"currency_hinrichs"});
  EXPECT_EQ(walk({{"expiration_date", "no"}, {"update_frequency_known", "no"}}),
            std::vector<std::string>{"currency_heinrich"});
}

TEST(Trees, EveryMetricReachable) {
  std::set<std::string> reached;
  for (const auto& t : builtin_trees())
    if (!t.is_subtree()) collect(t, reached);
  for (const auto& c : all_cards()) EXPECT_TRUE(reached.count(c.id)) << c.id;
}

TEST(Trees, LeafMetricsBelongToTheDimension) {
  for (const auto& t : builtin_trees()) {
    if (t.is_subtree()) continue;
    for (const auto& l : t.leaves)
      for (const auto& m : l.metrics) EXPECT_TRUE(card(m).has_dimension(t.dimension)) << t.dimension << ": " << m;
  }
}

TEST(Trees, JsonRoundTrip) {
  for (const auto& t : builtin_trees()) {
    auto back = DecisionTree::from_json(t.to_json().dump());
    EXPECT_EQ(back.to_json(), t.to_json());
  }
}

TEST(Trees, RejectsDanglingChild) {
  json j = builtin_tree("currency").to_json();
  j["nodes"][0]["answers"]["yes"] = "nowhere";
  EXPECT_THROW(DecisionTree::from_json(j.dump()), Error);
}

TEST(Traverse, AccuracyWithoutGroundTruth) {
  auto d = traverse(builtin_tree("accuracy"), profile({{"ground_truth", "no"}, {"blank_sample", "no"}}));
  EXPECT_EQ(metric_ids(d), std::vector<std::string>{"entropy"});
  ASSERT_EQ(d.trace.size(), 2u);
  EXPECT_EQ(d.trace[0].answer, "no");
  auto lod = traverse(builtin_tree("accuracy"), profile({{"ground_truth", "no"}, {"blank_sample", "yes"}}));
  EXPECT_EQ(metric_ids(lod), (std::vector<std::string>{"limit_of_detection", "limit_of_quantification"}));
}

TEST(Traverse, CompletenessPartialRecommendsAll) {
  auto general = traverse(builtin_tree("completeness"), profile({{"completeness_interest", "general"}}));
  EXPECT_EQ(metric_ids(general), std::vector<std::string>{"completeness"});
  auto open = traverse(builtin_tree("completeness"), profile(json::object()));
  EXPECT_TRUE(open.metrics.empty());
  ASSERT_EQ(open.recommended.size(), 3u);
  ASSERT_EQ(open.unanswered.size(), 1u);
  EXPECT_EQ(open.unanswered[0].question, "completeness_interest");
}

TEST(Traverse, StrictNamesBlockingQuestion) {
  try {
    traverse(builtin_tree("currency"), profile({{"expiration_date", "yes"}}), TraverseMode::strict);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::unanswered);
    EXPECT_NE(std::string(e.what()).find("What kind of decay is expected?"), std::string::npos);
  }
}

TEST(Traverse, InvalidAnswerListsOptions) {
  try {
    traverse(builtin_tree("currency"), profile({{"expiration_date", "maybe"}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_argument);
    EXPECT_NE(std::string(e.what()).find("yes"), std::string::npos);
  }
}

TEST(Traverse, NoisyLabelsSingleRater) {
  auto d = traverse(builtin_tree("noisy_labels"), profile({{"annotator_count", "one"}}));
  EXPECT_TRUE(d.metrics.empty());
  EXPECT_EQ(d.reason, "multiple raters required");
}

TEST(Traverse, RegressionUsesDistributionSubtree) {
  auto p = profile({{"ml_task", "regression"}});
  auto d = traverse(builtin_tree("target_class_balance"), p);
  ASSERT_FALSE(d.subtrees.empty());
  EXPECT_EQ(d.subtrees[0].rfind("distribution_metrics", 0), 0u);
  for (const auto& m : d.recommended) EXPECT_EQ(m.context, "Target distribution as reference");
  ASSERT_FALSE(d.unanswered.empty());
  EXPECT_EQ(d.unanswered[0].tree, "distribution_metrics");
}

TEST(Traverse, ScopedAnswerWins) {
  UseCaseProfile p = profile({{"data_type", "categorical"}, {"variety.data_type", "numerical"}});
  ASSERT_NE(p.lookup("variety", "data_type"), nullptr);
  EXPECT_EQ(p.lookup("variety", "data_type")->front(), "numerical");
  EXPECT_EQ(p.lookup("homogeneity", "data_type")->front(), "categorical");
}

TEST(SelectAll, PtbxlProfileSixteenEntries) {
  auto sel = select_all(UseCaseProfile::from_json(ptbxl_profile()));
  std::set<std::pair<std::string, std::string>> got;
  for (const auto& e : sel.entries()) got.insert({e.metric_id, e.scope});
  std::set<std::pair<std::string, std::string>> expect{
      {"completeness", "measurements"},       {"completeness", "metadata"},
      {"patient_level_completeness", "measurements"}, {"entropy", "measurements"},
      {"currency_heinrich", "all"},           {"generalized_imbalance_ratio", "labels"},
      {"granularity", "metadata"},            {"sampling_frequency", "measurements"},
      {"dataset_size", "all"},                {"range", "age"},
      {"mean_std", "age"},                    {"hill_number", "sex"},
      {"hill_number", "device"},              {"pearson", "age"},
      {"prevalence_of_duplicates", "all"},    {"mmd", "sex"}};
  EXPECT_EQ(sel.entries().size(), 16u);
  EXPECT_EQ(got, expect);
  EXPECT_EQ(metric_ids(*sel.find("accuracy")), std::vector<std::string>{"entropy"});
  EXPECT_EQ(sel.find("noisy_labels")->reason, "multiple raters required");
  EXPECT_FALSE(sel.find("distribution_drift")->relevant);
}

TEST(SelectAll, EmptyProfileReportsFirstQuestionEverywhere) {
  auto sel = select_all(UseCaseProfile{});
  ASSERT_EQ(sel.dimensions.size(), 14u);
  for (const auto& d : sel.dimensions) {
    const auto& tree = builtin_tree(d.dimension);
    if (tree.nodes.empty()) continue;
    ASSERT_FALSE(d.unanswered.empty()) << d.dimension;
    EXPECT_EQ(d.unanswered[0].question, tree.node(tree.root)->question) << d.dimension;
  }
}

TEST(SelectAll, StrictFailsOnGaps) {
  EXPECT_THROW(select_all(UseCaseProfile{}, TraverseMode::strict), Error);
  EXPECT_NO_THROW(select_all(UseCaseProfile::from_json(ptbxl_profile()), TraverseMode::strict));
}

TEST(Rationale, RoundTripAndTrace) {
  auto sel = select_all(UseCaseProfile::from_json(ptbxl_profile()));
  auto doc = rationale_document(sel, json{{"entropy", {{"m", 2}}}}, "2025-01-01T00:00:00Z");
  auto back = SelectionResult::from_json(doc);
  EXPECT_EQ(back.to_json(), sel.to_json());
  EXPECT_EQ(rationale_document(back, json{{"entropy", {{"m", 2}}}}, "2025-01-01T00:00:00Z"), doc);
  // every consumed answer appears in a trace step
  std::set<std::string> traced;
  for (const auto& d : sel.dimensions)
    for (const auto& s : d.trace) traced.insert(s.question + "=" + s.answer);
  EXPECT_TRUE(traced.count("ground_truth=no"));
  EXPECT_TRUE(traced.count("blank_sample=no"));
  EXPECT_TRUE(traced.count("update_frequency_known=no"));
  std::string text = doc.dump();
  EXPECT_NE(text.find("Does a ground truth exist?"), std::string::npos);
}

TEST(Profile, FlatAndStructuredForms) {
  auto flat = UseCaseProfile::from_json(json{{"ground_truth", "no"}});
  ASSERT_NE(flat.lookup("accuracy", "ground_truth"), nullptr);
  EXPECT_THROW(UseCaseProfile::from_json(json{{"dimensions", {"nonsense"}}}), Error);
  auto p = UseCaseProfile::from_json(ptbxl_profile());
  EXPECT_EQ(UseCaseProfile::from_json(p.to_json()).to_json(), p.to_json());
}
