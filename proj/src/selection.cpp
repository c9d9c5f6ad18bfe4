#include "dqm/selection.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <set>

#include "dqm/embedded.hpp"
#include "dqm/error.hpp"
#include "dqm/registry.hpp"

namespace dqm {

namespace {

using json = nlohmann::ordered_json;

std::string joined(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += ", ";
    out += "'" + s + "'";
  }
  return out;
}

std::vector<std::string> answer_list(const json& v, const std::string& key) {
  if (v.is_string()) return {v.get<std::string>()};
  if (v.is_array()) {
    std::vector<std::string> out;
    for (const auto& x : v) {
      if (!x.is_string()) throw Error(ErrorKind::parse, "profile: answers for '" + key + "' must be strings");
      out.push_back(x.get<std::string>());
    }
    return out;
  }
  throw Error(ErrorKind::parse, "profile: answer for '" + key + "' must be a string or a list of strings");
}

std::map<std::string, std::vector<std::string>> list_map(const json& j, const char* what) {
  std::map<std::string, std::vector<std::string>> out;
  if (!j.is_object()) throw Error(ErrorKind::parse, std::string("profile: '") + what + "' must be an object");
  for (const auto& [k, v] : j.items()) out[k] = answer_list(v, k);
  return out;
}

json list_map_json(const std::map<std::string, std::vector<std::string>>& m) {
  json j = json::object();
  for (const auto& [k, v] : m) j[k] = v.size() == 1 ? json(v.front()) : json(v);
  return j;
}

class Walker {
 public:
  Walker(const UseCaseProfile& profile, TraverseMode mode, DimensionSelection& out)
      : profile_(profile), mode_(mode), out_(out) {}

  void walk(const DecisionTree& tree, const std::string& id, const std::string& context, bool recommend) {
    if (const auto* leaf = tree.leaf(id)) {
      visit_leaf(tree, *leaf, context, recommend);
      return;
    }
    const TreeNode* node = tree.node(id);
    if (!node) throw Error(ErrorKind::parse, "tree '" + tree.dimension + "': dangling node '" + id + "'");
    if (recommend) {
      for (const auto& [label, child] : node->answers) walk(tree, child, context, true);
      return;
    }
    std::vector<std::string> options;
    for (const auto& [label, child] : node->answers) options.push_back(label);
    const auto* given = profile_.lookup(out_.dimension, node->question);
    if (!given || given->empty()) {
      if (mode_ == TraverseMode::strict) {
        throw Error(ErrorKind::unanswered, "dimension '" + out_.dimension + "': question '" + node->question +
                                               "' (" + node->text + ") is unanswered; options: " +
                                               joined(options));
      }
      out_.unanswered.push_back({tree.dimension, node->question, node->text, options});
      for (const auto& [label, child] : node->answers) walk(tree, child, context, true);
      return;
    }
    for (const auto& a : *given) {
      if (std::find(options.begin(), options.end(), a) == options.end()) {
        throw Error(ErrorKind::invalid_argument, "dimension '" + out_.dimension + "': '" + a +
                                                     "' is not a valid answer to '" + node->question +
                                                     "'; options: " + joined(options));
      }
    }
    for (const auto& [label, child] : node->answers) {
      if (std::find(given->begin(), given->end(), label) == given->end()) continue;
      out_.trace.push_back({tree.dimension, node->id, node->question, node->text, label});
      walk(tree, child, context, false);
    }
  }

 private:
  void visit_leaf(const DecisionTree& tree, const TreeLeaf& leaf, const std::string& context, bool recommend) {
    auto& target = recommend ? out_.recommended : out_.metrics;
    const std::string& ctx = leaf.context.empty() ? context : leaf.context;
    for (const auto& m : leaf.metrics) {
      bool seen = std::any_of(target.begin(), target.end(), [&](const auto& s) { return s.metric_id == m; });
      if (!seen) target.push_back({m, tree.dimension, ctx});
    }
    if (!leaf.reason.empty() && !recommend && out_.reason.empty()) out_.reason = leaf.reason;
    for (const auto& ref : leaf.subtrees) {
      std::string label = ref.context.empty() ? ref.tree : ref.tree + " (" + ref.context + ")";
      if (!recommend && std::find(out_.subtrees.begin(), out_.subtrees.end(), label) == out_.subtrees.end())
        out_.subtrees.push_back(label);
      const auto& sub = builtin_tree(ref.tree);
      walk(sub, sub.root, ref.context, recommend);
    }
  }

  const UseCaseProfile& profile_;
  TraverseMode mode_;
  DimensionSelection& out_;
};

json metrics_json(const std::vector<SelectedMetric>& ms) {
  json a = json::array();
  for (const auto& m : ms) a.push_back({{"metric_id", m.metric_id}, {"tree", m.tree}, {"context", m.context}});
  return a;
}

std::vector<SelectedMetric> metrics_from(const json& a) {
  std::vector<SelectedMetric> out;
  for (const auto& m : a) {
    out.push_back({m.at("metric_id").get<std::string>(), m.at("tree").get<std::string>(),
                   m.at("context").get<std::string>()});
  }
  return out;
}

}  // namespace

const TreeNode* DecisionTree::node(std::string_view id) const {
  for (const auto& n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

const TreeLeaf* DecisionTree::leaf(std::string_view id) const {
  for (const auto& l : leaves)
    if (l.id == id) return &l;
  return nullptr;
}

bool DecisionTree::is_subtree() const {
  return dimension == "distribution_metrics" || dimension == "correlation_coefficients";
}

DecisionTree DecisionTree::from_json(std::string_view text) {
  DecisionTree t;
  try {
    json j = json::parse(text);
    t.dimension = j.at("dimension").get<std::string>();
    t.title = j.value("title", t.dimension);
    t.source = j.value("source", "");
    t.root = j.at("root").get<std::string>();
    for (const auto& n : j.at("nodes")) {
      TreeNode node{n.at("id").get<std::string>(), n.at("question").get<std::string>(), n.value("text", ""), {}};
      for (const auto& [label, child] : n.at("answers").items())
        node.answers.emplace_back(label, child.get<std::string>());
      t.nodes.push_back(std::move(node));
    }
    for (const auto& l : j.at("leaves")) {
      TreeLeaf leaf;
      leaf.id = l.at("id").get<std::string>();
      if (l.contains("metrics")) leaf.metrics = l.at("metrics").get<std::vector<std::string>>();
      leaf.context = l.value("context", "");
      leaf.reason = l.value("reason", "");
      if (l.contains("subtrees")) {
        for (const auto& s : l.at("subtrees"))
          leaf.subtrees.push_back({s.at("tree").get<std::string>(), s.value("context", "")});
      }
      t.leaves.push_back(std::move(leaf));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("tree: ") + e.what());
  }

  std::set<std::string> ids;
  auto fail = [&](const std::string& what) { throw Error(ErrorKind::parse, "tree '" + t.dimension + "': " + what); };
  for (const auto& n : t.nodes)
    if (!ids.insert(n.id).second) fail("duplicate id '" + n.id + "'");
  for (const auto& l : t.leaves)
    if (!ids.insert(l.id).second) fail("duplicate id '" + l.id + "'");
  if (!ids.count(t.root)) fail("unknown root '" + t.root + "'");
  for (const auto& n : t.nodes) {
    if (n.answers.empty()) fail("question '" + n.id + "' has no answers");
    for (const auto& [label, child] : n.answers)
      if (!ids.count(child)) fail("answer '" + label + "' leads to unknown node '" + child + "'");
  }
  for (const auto& l : t.leaves) {
    for (const auto& s : l.subtrees)
      if (s.tree != "distribution_metrics" && s.tree != "correlation_coefficients")
        fail("leaf '" + l.id + "' references '" + s.tree + "', which is not a shared subtree");
  }
  return t;
}

json DecisionTree::to_json() const {
  json j;
  j["dimension"] = dimension;
  j["title"] = title;
  j["source"] = source;
  j["root"] = root;
  j["nodes"] = json::array();
  for (const auto& n : nodes) {
    json a = json::object();
    for (const auto& [label, child] : n.answers) a[label] = child;
    j["nodes"].push_back({{"id", n.id}, {"question", n.question}, {"text", n.text}, {"answers", a}});
  }
  j["leaves"] = json::array();
  for (const auto& l : leaves) {
    json lj = {{"id", l.id}, {"metrics", l.metrics}};
    if (!l.context.empty()) lj["context"] = l.context;
    if (!l.subtrees.empty()) {
      lj["subtrees"] = json::array();
      for (const auto& s : l.subtrees) lj["subtrees"].push_back({{"tree", s.tree}, {"context", s.context}});
    }
    if (!l.reason.empty()) lj["reason"] = l.reason;
    j["leaves"].push_back(lj);
  }
  return j;
}

const std::vector<DecisionTree>& builtin_trees() {
  static const std::vector<DecisionTree> trees = [] {
    std::vector<DecisionTree> parsed;
    for (const auto& [stem, text] : embedded::tree_files()) parsed.push_back(DecisionTree::from_json(text));
    std::vector<DecisionTree> ordered;
    auto take = [&](std::string_view name) {
      auto it = std::find_if(parsed.begin(), parsed.end(), [&](const auto& t) { return t.dimension == name; });
      if (it == parsed.end()) throw Error(ErrorKind::parse, "missing built-in tree '" + std::string(name) + "'");
      ordered.push_back(*it);
    };
    for (auto d : kDimensions) take(d);
    take("distribution_metrics");
    take("correlation_coefficients");
    for (const auto& t : ordered)
      for (const auto& l : t.leaves)
        for (const auto& m : l.metrics)
          if (!find_card(m))
            throw Error(ErrorKind::parse, "tree '" + t.dimension + "' names unknown metric '" + m + "'");
    return ordered;
  }();
  return trees;
}

const DecisionTree& builtin_tree(std::string_view name) {
  for (const auto& t : builtin_trees())
    if (t.dimension == name) return t;
  throw Error(ErrorKind::unknown_id, "unknown decision tree '" + std::string(name) + "'");
}

const std::vector<std::string>* UseCaseProfile::lookup(std::string_view dimension, std::string_view question) const {
  auto it = answers.find(std::string(dimension) + "." + std::string(question));
  if (it != answers.end()) return &it->second;
  it = answers.find(std::string(question));
  return it == answers.end() ? nullptr : &it->second;
}

bool UseCaseProfile::relevant(std::string_view dimension) const {
  return dimensions.empty() || std::find(dimensions.begin(), dimensions.end(), dimension) != dimensions.end();
}

UseCaseProfile UseCaseProfile::from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::parse, "profile: expected a JSON object");
  UseCaseProfile p;
  bool structured = false;
  for (const char* key : {"answers", "dimensions", "picks", "scopes"})
    if (j.contains(key) && !j.at(key).is_string()) structured = true;
  if (!structured) {
    p.answers = list_map(j, "answers");
    return p;
  }
  for (const auto& [k, v] : j.items()) {
    if (k == "answers") {
      p.answers = list_map(v, "answers");
    } else if (k == "picks") {
      p.picks = list_map(v, "picks");
    } else if (k == "scopes") {
      p.scopes = list_map(v, "scopes");
    } else if (k == "dimensions") {
      p.dimensions = answer_list(v, "dimensions");
      for (const auto& d : p.dimensions) {
        if (std::find(std::begin(kDimensions), std::end(kDimensions), d) == std::end(kDimensions))
          throw Error(ErrorKind::parse, "profile: unknown dimension '" + d + "'");
      }
    } else {
      throw Error(ErrorKind::parse, "profile: unexpected key '" + k + "'");
    }
  }
  return p;
}

json UseCaseProfile::to_json() const {
  json j;
  j["dimensions"] = dimensions;
  j["answers"] = list_map_json(answers);
  j["picks"] = list_map_json(picks);
  j["scopes"] = list_map_json(scopes);
  return j;
}

DimensionSelection traverse(const DecisionTree& tree, const UseCaseProfile& profile, TraverseMode mode) {
  DimensionSelection out;
  out.dimension = tree.dimension;
  Walker(profile, mode, out).walk(tree, tree.root, "", false);

  if (auto it = profile.picks.find(tree.dimension); it != profile.picks.end()) {
    std::vector<SelectedMetric> kept;
    for (const auto& m : out.metrics)
      if (std::find(it->second.begin(), it->second.end(), m.metric_id) != it->second.end()) kept.push_back(m);
    for (const auto& pick : it->second) {
      bool found = std::any_of(out.metrics.begin(), out.metrics.end(),
                               [&](const auto& m) { return m.metric_id == pick; });
      if (!found) out.notes.push_back("pick '" + pick + "' is not reachable with the given answers; ignored");
    }
    out.metrics = std::move(kept);
  }
  if (out.metrics.empty() && out.unanswered.empty() && out.reason.empty()) out.reason = "no metric selected";
  return out;
}

SelectionResult select_all(const UseCaseProfile& profile, TraverseMode mode) {
  SelectionResult r;
  r.profile = profile;
  for (auto d : kDimensions) {
    const auto& tree = builtin_tree(d);
    if (!profile.relevant(d)) {
      DimensionSelection skip;
      skip.dimension = std::string(d);
      skip.relevant = false;
      skip.reason = "not marked relevant for the use case";
      r.dimensions.push_back(std::move(skip));
      continue;
    }
    r.dimensions.push_back(traverse(tree, profile, mode));
  }
  return r;
}

const DimensionSelection* SelectionResult::find(std::string_view dimension) const {
  for (const auto& d : dimensions)
    if (d.dimension == dimension) return &d;
  return nullptr;
}

std::vector<SelectionEntry> SelectionResult::entries() const {
  std::vector<SelectionEntry> out;
  for (const auto& d : dimensions) {
    if (!d.relevant) continue;
    for (const auto& m : d.metrics) {
      auto it = profile.scopes.find(m.metric_id);
      if (it == profile.scopes.end() || it->second.empty()) {
        out.push_back({d.dimension, m.metric_id, "", m.context});
      } else {
        for (const auto& s : it->second) out.push_back({d.dimension, m.metric_id, s, m.context});
      }
    }
  }
  return out;
}

std::vector<std::string> SelectionResult::metric_ids() const {
  std::vector<std::string> out;
  for (const auto& d : dimensions)
    for (const auto& m : d.metrics)
      if (d.relevant && std::find(out.begin(), out.end(), m.metric_id) == out.end()) out.push_back(m.metric_id);
  return out;
}

json SelectionResult::to_json() const {
  json j;
  j["profile"] = profile.to_json();
  j["dimensions"] = json::array();
  for (const auto& d : dimensions) {
    json dj;
    dj["dimension"] = d.dimension;
    dj["relevant"] = d.relevant;
    dj["metrics"] = metrics_json(d.metrics);
    dj["recommended"] = metrics_json(d.recommended);
    dj["trace"] = json::array();
    for (const auto& s : d.trace) {
      dj["trace"].push_back(
          {{"tree", s.tree}, {"node", s.node}, {"question", s.question}, {"text", s.text}, {"answer", s.answer}});
    }
    dj["subtrees"] = d.subtrees;
    dj["unanswered"] = json::array();
    for (const auto& u : d.unanswered) {
      dj["unanswered"].push_back(
          {{"tree", u.tree}, {"question", u.question}, {"text", u.text}, {"options", u.options}});
    }
    dj["reason"] = d.reason;
    dj["notes"] = d.notes;
    j["dimensions"].push_back(dj);
  }
  j["entries"] = json::array();
  for (const auto& e : entries()) {
    j["entries"].push_back(
        {{"dimension", e.dimension}, {"metric_id", e.metric_id}, {"scope", e.scope}, {"context", e.context}});
  }
  return j;
}

SelectionResult SelectionResult::from_json(const json& j) {
  SelectionResult r;
  try {
    const json& sel = j.contains("selection") ? j.at("selection") : j;
    r.profile = UseCaseProfile::from_json(sel.at("profile"));
    for (const auto& dj : sel.at("dimensions")) {
      DimensionSelection d;
      d.dimension = dj.at("dimension").get<std::string>();
      d.relevant = dj.value("relevant", true);
      d.metrics = metrics_from(dj.at("metrics"));
      d.recommended = metrics_from(dj.value("recommended", json::array()));
      for (const auto& s : dj.value("trace", json::array())) {
        d.trace.push_back({s.at("tree").get<std::string>(), s.at("node").get<std::string>(),
                           s.at("question").get<std::string>(), s.at("text").get<std::string>(),
                           s.at("answer").get<std::string>()});
      }
      d.subtrees = dj.value("subtrees", std::vector<std::string>{});
      for (const auto& u : dj.value("unanswered", json::array())) {
        d.unanswered.push_back({u.at("tree").get<std::string>(), u.at("question").get<std::string>(),
                                u.at("text").get<std::string>(), u.at("options").get<std::vector<std::string>>()});
      }
      d.reason = dj.value("reason", "");
      d.notes = dj.value("notes", std::vector<std::string>{});
      r.dimensions.push_back(std::move(d));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("selection: ") + e.what());
  }
  return r;
}

std::string utc_timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json rationale_document(const SelectionResult& sel, const json& params, std::optional<std::string> generated_at) {
  json doc;
  doc["selection"] = sel.to_json();
  doc["parameters"] = params.is_null() ? json::object() : params;
  doc["library_version"] = DQM_VERSION;
  doc["generated_at"] = generated_at ? *generated_at : utc_timestamp();
  return doc;
}

}  // namespace dqm
