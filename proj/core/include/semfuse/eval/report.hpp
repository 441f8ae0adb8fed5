#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "semfuse/core/label_set.hpp"
#include "semfuse/eval/iou.hpp"

namespace semfuse {

/// Aligned text table, one row per class with a defined IoU in label-set order,
/// followed by the mean. Empty results give an empty table.
std::string format_iou_table(const IouResult& result, const LabelSet& labels);

/// {"per_class": {name: iou}, "mean": float, "restricted_fov": bool}
nlohmann::json iou_to_json(const IouResult& result, const LabelSet& labels);
IouResult iou_from_json(const nlohmann::json& doc, const LabelSet& labels);

}  // namespace semfuse
