#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "octree/tree.hpp"

namespace octree::io {

inline constexpr int kModelFormatVersion = 1;

nlohmann::json model_to_json(const OcTree& tree);
OcTree model_from_json(const nlohmann::json& doc);

void save_model(const OcTree& tree, const std::filesystem::path& path);
OcTree load_model(const std::filesystem::path& path);

// One line per rule: "a2 ∈ [5.4, 6.6] AND a1 ∈ [3.5, 4.5]".
std::string rules_to_text(const RuleSet& rules);
nlohmann::json rules_to_json(const RuleSet& rules);

}  // namespace octree::io
