#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "semfuse/core/label_set.hpp"
#include "semfuse/geometry/spherical.hpp"
#include "semfuse/labelprop/pseudo_labels.hpp"

namespace semfuse {

/// Network input/target pair for one scan.
struct TrainingSample {
  int height = 0;
  int width = 0;
  /// 4 (range, x, y, z) or 5 (plus intensity).
  int channels = 4;
  /// H x W x channels, row-major.
  std::vector<float> data;
  /// H x W class indices, kUnlabeled where there is no target.
  std::vector<std::uint8_t> labels;
  nlohmann::json meta;
};

/// Pairs scan geometry with pseudo-labels. Cells where the scan has no return
/// are unlabeled. Throws ContractViolation when the shapes disagree.
TrainingSample make_training_sample(const RangeImage& scan, const PseudoLabelImage& labels, bool include_intensity,
                                    const LabelSet& label_set);

/// Writes channels.bin, labels.bin and meta.json into `dir`.
void write_training_sample(const std::filesystem::path& dir, const TrainingSample& sample);
TrainingSample read_training_sample(const std::filesystem::path& dir);

inline void export_training_pair(const std::filesystem::path& dir, const RangeImage& scan,
                                 const PseudoLabelImage& labels, bool include_intensity, const LabelSet& label_set) {
  write_training_sample(dir, make_training_sample(scan, labels, include_intensity, label_set));
}

}  // namespace semfuse
