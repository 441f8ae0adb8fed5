#pragma once

#include <filesystem>

#include "semfuse/core/label_set.hpp"
#include "semfuse/voxelmap/voxel_map.hpp"

namespace semfuse::io {

/// JSON header line followed by one record per voxel in key order: int32 ix, iy,
/// iz; float32 mean x, y, z; uint32 n_points; C float32 log-probabilities of the
/// infinite-horizon state. Horizon deques are not persisted.
void save_map_snapshot(const std::filesystem::path& path, const VoxelMap& map, const LabelSet& labels);
VoxelMap load_map_snapshot(const std::filesystem::path& path, const LabelSet& labels);

}  // namespace semfuse::io
