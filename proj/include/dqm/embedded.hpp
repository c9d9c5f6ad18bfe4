#pragma once

#include <string_view>
#include <utility>
#include <vector>

namespace dqm::embedded {

/// Built-in metric cards (JSON array).
std::string_view cards_json();
/// Built-in decision trees as {file stem, JSON text}, sorted by stem.
const std::vector<std::pair<std::string_view, std::string_view>>& tree_files();

}  // namespace dqm::embedded
