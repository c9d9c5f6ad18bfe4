#include "dqm/registry.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "dqm/embedded.hpp"
#include "dqm/error.hpp"

namespace dqm {

namespace {

using json = nlohmann::ordered_json;

template <std::size_t N>
bool contains(const std::string_view (&set)[N], std::string_view v) {
  return std::find(std::begin(set), std::end(set), v) != std::end(set);
}

bool contains(const std::vector<std::string>& v, std::string_view x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

template <std::size_t N>
std::string joined(const std::string_view (&set)[N]) {
  std::string out;
  for (auto s : set) {
    if (!out.empty()) out += ", ";
    out += s;
  }
  return out;
}

std::vector<std::string> strings(const json& j, const char* key) {
  std::vector<std::string> out;
  if (j.contains(key)) {
    for (const auto& v : j.at(key)) out.push_back(v.get<std::string>());
  }
  return out;
}

std::string text(const json& j, const char* key) {
  return j.contains(key) ? j.at(key).get<std::string>() : std::string{};
}

void validate(const std::vector<MetricCard>& cards) {
  std::vector<std::string> ids;
  for (const auto& c : cards) {
    auto fail = [&](const std::string& what) {
      throw Error(ErrorKind::parse, "card '" + c.id + "': " + what);
    };
    if (c.id.empty()) throw Error(ErrorKind::parse, "card without id");
    if (contains(ids, c.id)) fail("duplicate id");
    ids.push_back(c.id);
    if (!contains(kGroups, c.group)) fail("unknown group '" + c.group + "'");
    if (c.dimensions.empty()) fail("no dimensions");
    for (const auto& d : c.dimensions)
      if (!contains(kDimensions, d)) fail("unknown dimension '" + d + "'");
    for (const auto& m : c.applicability.modalities)
      if (!contains(kModalities, m)) fail("unknown modality '" + m + "'");
    for (const auto& v : c.applicability.variable_types)
      if (!contains(kVariableTypes, v)) fail("unknown variable type '" + v + "'");
  }
  for (const auto& c : cards)
    for (const auto& r : c.relations)
      if (!contains(ids, r))
        throw Error(ErrorKind::parse, "card '" + c.id + "': relation to unknown metric '" + r + "'");
}

void bullet_list(std::ostringstream& os, const std::vector<std::string>& items) {
  for (const auto& s : items) os << "- " << s << "\n";
}

std::string comma_list(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += ", ";
    out += s;
  }
  return out;
}

json to_json(const MetricCard& c) {
  json j;
  j["id"] = c.id;
  j["name"] = c.name;
  j["synonyms"] = c.synonyms;
  j["summary"] = c.summary;
  j["definition"] = c.definition;
  j["visualization"] = c.visualization;
  j["value_range"] = {{"interval", c.value_range.interval},
                      {"high", c.value_range.high},
                      {"low", c.value_range.low}};
  j["dimensions"] = c.dimensions;
  j["group"] = c.group;
  j["references"] = c.references;
  j["example"] = c.example;
  j["relations"] = c.relations;
  j["applicability"] = {{"modalities", c.applicability.modalities},
                        {"variable_types", c.applicability.variable_types}};
  j["prerequisites"] = c.prerequisites;
  json tags = json::array();
  for (auto t : c.pitfalls.tags) tags.push_back(std::string(to_string(t)));
  j["pitfalls"] = {{"tags", tags}, {"notes", c.pitfalls.notes}};
  return j;
}

std::string to_markdown(const MetricCard& c) {
  std::ostringstream os;
  os << "# " << c.name << "\n\n";
  if (!c.synonyms.empty()) os << "*Also known as:* " << comma_list(c.synonyms) << "\n\n";
  os << c.summary << "\n\n";

  os << "## Definition\n\n" << c.definition << "\n\n";
  if (!c.visualization.empty()) os << "Visualization: " << c.visualization << "\n\n";

  os << "## Value range\n\n" << c.value_range.interval << "\n\n";
  os << "- High: " << c.value_range.high << "\n- Low: " << c.value_range.low << "\n\n";

  os << "## Quality dimensions\n\n";
  os << "Group: " << c.group << "\n\n";
  bullet_list(os, c.dimensions);
  os << "\n";

  os << "## References\n\n";
  bullet_list(os, c.references);
  os << "\n";

  if (!c.example.empty()) os << "## Example\n\n" << c.example << "\n\n";

  os << "## Relation to other metrics\n\n";
  if (c.relations.empty()) {
    os << "None listed.\n\n";
  } else {
    for (const auto& r : c.relations) {
      const auto* other = find_card(r);
      os << "- " << (other ? other->name : r) << " (`" << r << "`)\n";
    }
    os << "\n";
  }

  os << "## Applicability\n\n";
  os << "- Modalities: " << comma_list(c.applicability.modalities) << "\n";
  os << "- Variable types: " << comma_list(c.applicability.variable_types) << "\n\n";

  os << "## Prerequisites and recommendations\n\n";
  if (c.prerequisites.empty()) os << "None.\n";
  bullet_list(os, c.prerequisites);
  os << "\n";

  os << "## Pitfalls and limitations\n\n";
  if (c.pitfalls.tags.empty() && c.pitfalls.notes.empty()) os << "None listed.\n";
  for (auto t : c.pitfalls.tags) os << "- " << describe(t) << "\n";
  bullet_list(os, c.pitfalls.notes);
  return os.str();
}

}  // namespace

std::string_view to_string(PitfallTag tag) {
  switch (tag) {
    case PitfallTag::parameter_choice: return "parameter_choice";
    case PitfallTag::outlier_sensitivity: return "outlier_sensitivity";
    case PitfallTag::missing_value_sensitivity: return "missing_value_sensitivity";
    case PitfallTag::small_sample_instability: return "small_sample_instability";
    case PitfallTag::imbalance_instability: return "imbalance_instability";
  }
  return "";
}

std::string_view describe(PitfallTag tag) {
  switch (tag) {
    case PitfallTag::parameter_choice: return "dependence on parameter choice";
    case PitfallTag::outlier_sensitivity: return "sensitive to outliers";
    case PitfallTag::missing_value_sensitivity: return "sensitivity to missing values";
    case PitfallTag::small_sample_instability: return "instability for small sample sizes";
    case PitfallTag::imbalance_instability: return "instability for imbalanced data";
  }
  return "";
}

PitfallTag parse_pitfall(std::string_view text) {
  for (auto t : {PitfallTag::parameter_choice, PitfallTag::outlier_sensitivity,
                 PitfallTag::missing_value_sensitivity, PitfallTag::small_sample_instability,
                 PitfallTag::imbalance_instability}) {
    if (to_string(t) == text) return t;
  }
  throw Error(ErrorKind::parse, "unknown pitfall tag '" + std::string(text) + "'");
}

bool MetricCard::has_dimension(std::string_view dim) const { return contains(dimensions, dim); }
bool MetricCard::supports_modality(std::string_view m) const {
  return contains(applicability.modalities, m);
}
bool MetricCard::supports_variable_type(std::string_view v) const {
  return contains(applicability.variable_types, v);
}

std::vector<MetricCard> parse_cards(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("cards: ") + e.what());
  }
  if (!doc.is_array()) throw Error(ErrorKind::parse, "cards: expected a JSON array");
  std::vector<MetricCard> cards;
  try {
    for (const auto& j : doc) {
      MetricCard c;
      c.id = j.at("id").get<std::string>();
      c.name = j.at("name").get<std::string>();
      c.synonyms = strings(j, "synonyms");
      c.summary = text(j, "summary");
      c.definition = text(j, "definition");
      c.visualization = text(j, "visualization");
      if (j.contains("value_range")) {
        const auto& vr = j.at("value_range");
        c.value_range = {text(vr, "interval"), text(vr, "high"), text(vr, "low")};
      }
      c.dimensions = strings(j, "dimensions");
      c.group = j.at("group").get<std::string>();
      c.references = strings(j, "references");
      c.example = text(j, "example");
      c.relations = strings(j, "relations");
      if (j.contains("applicability")) {
        c.applicability.modalities = strings(j.at("applicability"), "modalities");
        c.applicability.variable_types = strings(j.at("applicability"), "variable_types");
      }
      c.prerequisites = strings(j, "prerequisites");
      if (j.contains("pitfalls")) {
        for (const auto& t : strings(j.at("pitfalls"), "tags")) c.pitfalls.tags.push_back(parse_pitfall(t));
        c.pitfalls.notes = strings(j.at("pitfalls"), "notes");
      }
      cards.push_back(std::move(c));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("cards: ") + e.what());
  }
  validate(cards);
  return cards;
}

const std::vector<MetricCard>& all_cards() {
  static const std::vector<MetricCard> cards = parse_cards(embedded::cards_json());
  return cards;
}

const MetricCard* find_card(std::string_view id) {
  for (const auto& c : all_cards())
    if (c.id == id) return &c;
  return nullptr;
}

const MetricCard& card(std::string_view id) {
  if (const auto* c = find_card(id)) return *c;
  throw Error(ErrorKind::unknown_id, "unknown metric '" + std::string(id) + "'");
}

std::vector<const MetricCard*> filter(const CardFilter& f) {
  if (f.dimension && !contains(kDimensions, *f.dimension))
    throw Error(ErrorKind::invalid_argument,
                "unknown dimension '" + *f.dimension + "' (expected one of: " + joined(kDimensions) + ")");
  if (f.group && !contains(kGroups, *f.group))
    throw Error(ErrorKind::invalid_argument,
                "unknown group '" + *f.group + "' (expected one of: " + joined(kGroups) + ")");
  if (f.modality && !contains(kModalities, *f.modality))
    throw Error(ErrorKind::invalid_argument,
                "unknown modality '" + *f.modality + "' (expected one of: " + joined(kModalities) + ")");
  if (f.variable_type && !contains(kVariableTypes, *f.variable_type))
    throw Error(ErrorKind::invalid_argument, "unknown variable type '" + *f.variable_type +
                                                 "' (expected one of: " + joined(kVariableTypes) + ")");
  std::vector<const MetricCard*> out;
  for (const auto& c : all_cards()) {
    if (f.dimension && !c.has_dimension(*f.dimension)) continue;
    if (f.group && c.group != *f.group) continue;
    if (f.modality && !c.supports_modality(*f.modality)) continue;
    if (f.variable_type && !c.supports_variable_type(*f.variable_type)) continue;
    out.push_back(&c);
  }
  return out;
}

CardFormat parse_card_format(std::string_view text) {
  if (text == "md" || text == "markdown") return CardFormat::markdown;
  if (text == "json") return CardFormat::json;
  throw Error(ErrorKind::invalid_argument, "unknown card format '" + std::string(text) + "' (md or json)");
}

std::string render_card(const MetricCard& c, CardFormat format) {
  if (format == CardFormat::json) return to_json(c).dump(2) + "\n";
  return to_markdown(c);
}

std::string render_card(std::string_view id, CardFormat format) { return render_card(card(id), format); }

}  // namespace dqm
