#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semfuse/core/label_set.hpp"
#include "semfuse/core/semantic_cloud.hpp"
#include "semfuse/geometry/pose.hpp"
#include "semfuse/geometry/spherical.hpp"
#include "semfuse/voxelmap/voxel_map.hpp"

namespace semfuse {

enum class Provenance { single_overlay, camonly_map, fused_map };

std::string_view to_string(Provenance p);
/// Throws ConfigError for an unknown name.
Provenance provenance_from_string(std::string_view s);

inline constexpr double kDefaultPseudoLabelThreshold = 0.80;

struct ScanWindowPolicy {
  /// Dynamic-class points only reach views within this many scan ids.
  int window = 2;
  /// Per-class dynamic flags, usually LabelSet::dynamic_mask().
  std::vector<bool> dynamic;

  static ScanWindowPolicy from_labels(const LabelSet& labels, int window = 2);
  bool is_dynamic(std::size_t cls) const { return cls < dynamic.size() && dynamic[cls]; }
  /// Throws ConfigError for a negative window.
  void validate() const;
};

/// One LiDAR scan as seen from its own sensor pose.
struct ScanView {
  std::int64_t scan_id = 0;
  /// Maps sensor coordinates to world coordinates.
  Pose viewpoint;
  /// Points in the sensor frame. Only single-overlay labelling reads the
  /// distributions.
  const SemanticCloud* cloud = nullptr;
};

struct PseudoLabelImage {
  int height = 0;
  int width = 0;
  /// Class per cell, kUnlabeled where no confident label exists.
  std::vector<std::uint8_t> labels;
  /// Max probability of the surface that won the cell, 0 where nothing did.
  std::vector<float> confidence;
  /// Rendered geometry in the sensor frame of the viewpoint.
  RangeImage geometry;
  Provenance provenance = Provenance::camonly_map;
  std::int64_t scan_id = 0;
  Pose viewpoint;
  SphericalModel model;
  double threshold = kDefaultPseudoLabelThreshold;
  std::vector<std::string> warnings;

  std::size_t labeled_count() const;
};

struct PseudoLabelOptions {
  ScanWindowPolicy policy;
  double threshold = kDefaultPseudoLabelThreshold;
  SphericalModel model;
  Provenance provenance = Provenance::camonly_map;
  Horizon horizon = Horizon::infinite;
};

/// Renders the aggregated map into every scan's viewpoint.
///
/// Every scan point is placed in the world and takes the distribution of the map
/// voxel it falls in (points in unmapped voxels are dropped). Points whose voxel
/// argmax is a static class are rendered into all views; dynamic-class points
/// from scan j reach view k only when |j - k| <= window. The nearest surface
/// wins each cell, and cells whose winning confidence is below the threshold
/// stay unlabeled. An empty map yields all-unlabeled images with a warning.
std::vector<PseudoLabelImage> generate_pseudolabels(const VoxelMap& map, std::span<const ScanView> scans,
                                                    const PseudoLabelOptions& options);

/// Labels a scan from its own fused cloud alone (no aggregation).
PseudoLabelImage single_overlay_pseudolabels(const ScanView& scan, double threshold, const SphericalModel& model);

}  // namespace semfuse
