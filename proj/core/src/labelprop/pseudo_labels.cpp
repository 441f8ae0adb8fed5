#include "semfuse/labelprop/pseudo_labels.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <unordered_map>

#include "semfuse/core/errors.hpp"
#include "semfuse/core/probability.hpp"

namespace semfuse {

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::single_overlay:
      return "single_overlay";
    case Provenance::camonly_map:
      return "camonly_map";
    case Provenance::fused_map:
      return "fused_map";
  }
  return "unknown";
}

Provenance provenance_from_string(std::string_view s) {
  if (s == "single_overlay") return Provenance::single_overlay;
  if (s == "camonly_map") return Provenance::camonly_map;
  if (s == "fused_map") return Provenance::fused_map;
  throw ConfigError("unknown provenance '" + std::string(s) + "'");
}

ScanWindowPolicy ScanWindowPolicy::from_labels(const LabelSet& labels, int window) {
  return ScanWindowPolicy{window, labels.dynamic_mask()};
}

void ScanWindowPolicy::validate() const {
  if (window < 0) throw ConfigError("scan window must be non-negative, got " + std::to_string(window));
}

std::size_t PseudoLabelImage::labeled_count() const {
  return static_cast<std::size_t>(
      std::count_if(labels.begin(), labels.end(), [](std::uint8_t l) { return l != kUnlabeled; }));
}

namespace {

PseudoLabelImage blank_image(const ScanView& scan, const PseudoLabelOptions& options) {
  PseudoLabelImage img;
  img.height = options.model.height;
  img.width = options.model.width;
  const std::size_t n = static_cast<std::size_t>(img.height) * img.width;
  img.labels.assign(n, kUnlabeled);
  img.confidence.assign(n, 0.0f);
  img.geometry = RangeImage(img.height, img.width, true);
  img.provenance = options.provenance;
  img.scan_id = scan.scan_id;
  img.viewpoint = scan.viewpoint;
  img.model = options.model;
  img.threshold = options.threshold;
  return img;
}

struct VoxelLabel {
  std::uint8_t cls = 0;
  double confidence = 0.0;
  bool dynamic = false;
};

struct WorldPoint {
  Eigen::Vector3d position;
  std::int64_t scan_id;
  std::uint32_t voxel;
  float intensity;
};

}  // namespace

std::vector<PseudoLabelImage> generate_pseudolabels(const VoxelMap& map, std::span<const ScanView> scans,
                                                    const PseudoLabelOptions& options) {
  options.policy.validate();
  options.model.validate();
  std::vector<PseudoLabelImage> images;
  images.reserve(scans.size());
  if (map.empty()) {
    for (const auto& scan : scans) {
      images.push_back(blank_image(scan, options));
      images.back().warnings.push_back("map is empty; every cell is unlabeled");
    }
    return images;
  }

  const double vs = map.config().voxel_size;
  std::unordered_map<VoxelKey, std::uint32_t, VoxelKeyHash> slot_of;
  std::vector<VoxelLabel> voxels;
  std::vector<WorldPoint> world;
  std::vector<double> dist(map.num_classes());
  for (const auto& scan : scans) {
    if (!scan.cloud) throw ContractViolation("scan view has no point cloud");
    const Eigen::Isometry3d world_from_sensor = scan.viewpoint.isometry();
    for (std::size_t i = 0; i < scan.cloud->size(); ++i) {
      const Eigen::Vector3d p = world_from_sensor * scan.cloud->point(i).cast<double>();
      const VoxelKey key = voxel_key(p, vs);
      auto it = slot_of.find(key);
      if (it == slot_of.end()) {
        const VoxelState* state = map.find(key);
        if (!state) continue;
        map.distribution_into(*state, options.horizon, dist);
        const std::size_t cls = argmax(dist);
        voxels.push_back({static_cast<std::uint8_t>(cls), dist[cls], options.policy.is_dynamic(cls)});
        it = slot_of.emplace(key, static_cast<std::uint32_t>(voxels.size() - 1)).first;
      }
      world.push_back({p, scan.scan_id, it->second, scan.cloud->intensity(i)});
    }
  }

  const std::size_t cells = static_cast<std::size_t>(options.model.height) * options.model.width;
  std::vector<std::int32_t> winner(cells);
  std::vector<double> best(cells);
  for (const auto& scan : scans) {
    PseudoLabelImage img = blank_image(scan, options);
    const Eigen::Isometry3d sensor_from_world = scan.viewpoint.isometry().inverse();
    std::fill(winner.begin(), winner.end(), -1);
    std::fill(best.begin(), best.end(), std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < world.size(); ++i) {
      const WorldPoint& wp = world[i];
      if (voxels[wp.voxel].dynamic && std::llabs(wp.scan_id - scan.scan_id) > options.policy.window) continue;
      const auto cell = spherical_cell(sensor_from_world * wp.position, options.model);
      if (!cell) continue;
      const std::size_t idx = img.geometry.index(cell->row, cell->col);
      if (cell->range < best[idx]) {
        best[idx] = cell->range;
        winner[idx] = static_cast<std::int32_t>(i);
      }
    }
    for (std::size_t idx = 0; idx < cells; ++idx) {
      if (winner[idx] < 0) continue;
      const WorldPoint& wp = world[static_cast<std::size_t>(winner[idx])];
      const VoxelLabel& v = voxels[wp.voxel];
      const Eigen::Vector3d p = sensor_from_world * wp.position;
      img.geometry.range[idx] = static_cast<float>(best[idx]);
      img.geometry.x[idx] = static_cast<float>(p.x());
      img.geometry.y[idx] = static_cast<float>(p.y());
      img.geometry.z[idx] = static_cast<float>(p.z());
      img.geometry.intensity[idx] = wp.intensity;
      img.geometry.source[idx] = winner[idx];
      img.geometry.label[idx] = v.cls;
      img.confidence[idx] = static_cast<float>(v.confidence);
      if (v.confidence >= options.threshold) img.labels[idx] = v.cls;
    }
    images.push_back(std::move(img));
  }
  return images;
}

PseudoLabelImage single_overlay_pseudolabels(const ScanView& scan, double threshold, const SphericalModel& model) {
  if (!scan.cloud) throw ContractViolation("scan view has no point cloud");
  PseudoLabelOptions options;
  options.threshold = threshold;
  options.model = model;
  options.provenance = Provenance::single_overlay;
  PseudoLabelImage img = blank_image(scan, options);
  img.geometry = render_virtual_scan(*scan.cloud, Pose{}, model);
  for (std::size_t idx = 0; idx < img.labels.size(); ++idx) {
    const std::int32_t src = img.geometry.source[idx];
    if (src < 0) continue;
    const auto d = scan.cloud->distribution(static_cast<std::size_t>(src));
    const std::size_t cls = argmax(d);
    img.confidence[idx] = static_cast<float>(d[cls]);
    if (d[cls] >= threshold) img.labels[idx] = static_cast<std::uint8_t>(cls);
  }
  return img;
}

}  // namespace semfuse
