#pragma once

#include <filesystem>

#include "semfuse/core/label_set.hpp"
#include "semfuse/fusion/segmentation_frame.hpp"

namespace semfuse::io {

/// Header line, H x W x C float32 probabilities, then H x W float32 depth when
/// the frame has it.
void save_frame(const std::filesystem::path& path, const SegmentationFrame& frame, const LabelSet& labels);
SegmentationFrame load_frame(const std::filesystem::path& path, const LabelSet& labels);

}  // namespace semfuse::io
