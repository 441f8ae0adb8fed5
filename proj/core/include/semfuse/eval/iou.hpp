#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Geometry>

#include "semfuse/core/label_set.hpp"
#include "semfuse/core/semantic_cloud.hpp"
#include "semfuse/geometry/camera.hpp"
#include "semfuse/voxelmap/voxel_map.hpp"

namespace semfuse {

/// Per-class true positive, false positive and false negative counters.
/// Accumulators over disjoint shards merge into the single-pass result.
class ConfusionAccumulator {
 public:
  explicit ConfusionAccumulator(std::size_t num_classes, std::optional<std::size_t> unknown_class = std::nullopt);

  /// A match counts TP. A mismatch counts FP for the prediction and FN for the
  /// reference, except that an unknown prediction counts only the FN.
  void add(std::size_t predicted, std::size_t reference);
  /// Reference element with no prediction at all: FN only.
  void add_missed(std::size_t reference);
  /// Prediction with no reference element: FP only.
  void add_spurious(std::size_t predicted);
  void merge(const ConfusionAccumulator& other);

  std::size_t num_classes() const noexcept { return tp_.size(); }
  std::uint64_t tp(std::size_t c) const { return tp_.at(c); }
  std::uint64_t fp(std::size_t c) const { return fp_.at(c); }
  std::uint64_t fn(std::size_t c) const { return fn_.at(c); }

  bool operator==(const ConfusionAccumulator&) const = default;

 private:
  std::vector<std::uint64_t> tp_, fp_, fn_;
  std::optional<std::size_t> unknown_;
};

struct IouOptions {
  /// Average over every class with any count instead of only the classes
  /// present in the reference.
  bool include_empty_classes = false;
};

struct IouResult {
  /// TP / (TP + FP + FN); empty when the class never occurred.
  std::vector<std::optional<double>> per_class;
  double mean = 0.0;
  std::size_t classes_in_mean = 0;
  bool restricted_fov = false;
};

IouResult compute_iou(const ConfusionAccumulator& acc, const IouOptions& options = {}, bool restricted_fov = false);

/// Viewing volume of a camera placed in the world.
struct CameraFrustum {
  CameraModel camera;
  /// Maps world coordinates into the camera frame.
  Eigen::Isometry3d T_cam_world = Eigen::Isometry3d::Identity();

  bool contains(const Eigen::Vector3d& p_world) const;
};

/// Adds the points of a world-frame cloud to `acc`, each compared with the
/// argmax of the reference voxel it falls in. Points in unobserved voxels are
/// skipped. With a frustum, points outside it and points whose reference voxel
/// is the unknown class are skipped.
void accumulate_scan_vs_map(ConfusionAccumulator& acc, const SemanticCloud& cloud, const VoxelMap& reference,
                            const LabelSet& labels, const CameraFrustum* restrict = nullptr);

IouResult iou_scan_vs_map(const SemanticCloud& cloud, const VoxelMap& reference, const LabelSet& labels,
                          const CameraFrustum* restrict = nullptr, const IouOptions& options = {});

/// Voxelwise argmax comparison over the union of occupied keys. A reference
/// voxel missing from the prediction is a false negative, a predicted voxel
/// missing from the reference a false positive; unknown reference voxels are
/// skipped. Throws ConfigError on a voxel size mismatch.
void accumulate_map_vs_map(ConfusionAccumulator& acc, const VoxelMap& predicted, const VoxelMap& reference,
                           const LabelSet& labels);

IouResult iou_map_vs_map(const VoxelMap& predicted, const VoxelMap& reference, const LabelSet& labels,
                         const IouOptions& options = {});

}  // namespace semfuse
