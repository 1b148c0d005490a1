#pragma once

// Internal JSON conversions shared by the dataset, report and simulation code.

#include <json.hpp>

#include "thresholds/types.hpp"

namespace thresholds::detail {

using nlohmann::json;

json support_to_json(const SupportKind& support);
SupportKind support_from_json(const json& j);

json family_to_json(const DifficultyFamily& family);
DifficultyFamily family_from_json(const json& j);

/// Item entry without its id (the id is the key in the "items" object).
json item_to_json(const ItemSpec& item);
ItemSpec item_from_json(const std::string& id, const json& j);

json model_spec_to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const json& j);

/// Item objects in CSV/column order: {"items": {...}, "order": [...]}.
json items_to_json(const std::vector<ItemSpec>& items);
std::vector<ItemSpec> items_from_json(const json& j);

/// Doubles that may be infinite are written as the strings "inf"/"-inf".
json number_to_json(double v);
double number_from_json(const json& j);

}  // namespace thresholds::detail
