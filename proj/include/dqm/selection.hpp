#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace dqm {

struct TreeNode {
  std::string id;
  std::string question;  // profile key; several nodes may ask the same question
  std::string text;
  std::vector<std::pair<std::string, std::string>> answers;  // label -> child id, figure order
};

struct SubtreeRef {
  std::string tree;
  std::string context;
};

struct TreeLeaf {
  std::string id;
  std::vector<std::string> metrics;  // left to right
  std::string context;
  std::vector<SubtreeRef> subtrees;
  std::string reason;  // why the leaf is empty, if it is
};

struct DecisionTree {
  std::string dimension;  // or the subtree name
  std::string title;
  std::string source;
  std::string root;
  std::vector<TreeNode> nodes;
  std::vector<TreeLeaf> leaves;

  const TreeNode* node(std::string_view id) const;
  const TreeLeaf* leaf(std::string_view id) const;
  bool is_subtree() const;

  /// Parses and checks the structure (unique ids, resolvable children).
  static DecisionTree from_json(std::string_view text);
  nlohmann::ordered_json to_json() const;
};

/// The 14 dimension trees in dimension order, then the two shared subtrees.
const std::vector<DecisionTree>& builtin_trees();
const DecisionTree& builtin_tree(std::string_view name);

/// Answers keyed "<dimension>.<question>" or plain "<question>"; the scoped
/// key wins. A question may carry several answers, each branch is followed.
struct UseCaseProfile {
  std::vector<std::string> dimensions;  // empty: every dimension is relevant
  std::map<std::string, std::vector<std::string>> answers;
  std::map<std::string, std::vector<std::string>> picks;   // dimension -> kept metrics
  std::map<std::string, std::vector<std::string>> scopes;  // metric -> scope labels

  const std::vector<std::string>* lookup(std::string_view dimension, std::string_view question) const;
  bool relevant(std::string_view dimension) const;

  /// Accepts {dimensions, answers, picks, scopes} or a flat question -> answer map.
  static UseCaseProfile from_json(const nlohmann::ordered_json& j);
  nlohmann::ordered_json to_json() const;
};

enum class TraverseMode { strict, partial };

struct TraceStep {
  std::string tree;
  std::string node;
  std::string question;
  std::string text;
  std::string answer;
};

struct UnansweredQuestion {
  std::string tree;
  std::string question;
  std::string text;
  std::vector<std::string> options;
};

struct SelectedMetric {
  std::string metric_id;
  std::string tree;     // tree owning the leaf
  std::string context;  // subtree reference note, if any
};

struct DimensionSelection {
  std::string dimension;
  bool relevant = true;
  std::vector<SelectedMetric> metrics;
  /// Metrics below an unanswered question (partial mode).
  std::vector<SelectedMetric> recommended;
  std::vector<TraceStep> trace;
  std::vector<std::string> subtrees;
  std::vector<UnansweredQuestion> unanswered;
  std::string reason;
  std::vector<std::string> notes;
};

struct SelectionEntry {
  std::string dimension;
  std::string metric_id;
  std::string scope;  // scope label from the profile; empty for the default
  std::string context;
};

struct SelectionResult {
  UseCaseProfile profile;
  std::vector<DimensionSelection> dimensions;

  const DimensionSelection* find(std::string_view dimension) const;
  /// One entry per chosen metric and scope label, relevant dimensions only.
  std::vector<SelectionEntry> entries() const;
  std::vector<std::string> metric_ids() const;

  nlohmann::ordered_json to_json() const;
  static SelectionResult from_json(const nlohmann::ordered_json& j);
};

/// Walks one dimension tree, expanding subtree references with the same
/// profile. Strict mode throws unanswered naming the blocking question.
DimensionSelection traverse(const DecisionTree& tree, const UseCaseProfile& profile,
                            TraverseMode mode = TraverseMode::partial);

/// Every dimension in order. Irrelevant dimensions are listed but not walked.
SelectionResult select_all(const UseCaseProfile& profile, TraverseMode mode = TraverseMode::partial);

/// Selection plus parameters, library version and generation time.
nlohmann::ordered_json rationale_document(const SelectionResult& sel, const nlohmann::ordered_json& params,
                                          std::optional<std::string> generated_at = std::nullopt);

/// UTC time formatted as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp();

}  // namespace dqm
