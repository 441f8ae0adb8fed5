#pragma once

#include <filesystem>

#include "semfuse/core/label_set.hpp"
#include "semfuse/core/semantic_cloud.hpp"

namespace semfuse::io {

/// Header line plus per-point records of float32 x, y, z, intensity and C
/// class probabilities.
void save_cloud(const std::filesystem::path& path, const SemanticCloud& cloud, const LabelSet& labels);

/// Rejects files written with a different label set. Probabilities are
/// renormalized in double precision after reading.
SemanticCloud load_cloud(const std::filesystem::path& path, const LabelSet& labels);

}  // namespace semfuse::io
