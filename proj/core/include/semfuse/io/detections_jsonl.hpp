#pragma once

#include <filesystem>
#include <vector>

#include "semfuse/core/label_set.hpp"
#include "semfuse/fusion/detection.hpp"

namespace semfuse::io {

/// One detection per line: {"t", "source", "class", "score", "bbox": [x0,y0,x1,y1]}.
/// Blank lines are skipped. Unknown class names and malformed lines raise
/// ParseError with the line number.
std::vector<Detection> load_detections(const std::filesystem::path& path, const LabelSet& labels);
void save_detections(const std::filesystem::path& path, const std::vector<Detection>& detections,
                     const LabelSet& labels);

}  // namespace semfuse::io
