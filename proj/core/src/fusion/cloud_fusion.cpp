#include "semfuse/fusion/cloud_fusion.hpp"

#include <algorithm>
#include <string>
#include <unordered_set>

#include "semfuse/core/errors.hpp"
#include "semfuse/core/probability.hpp"

namespace semfuse {

namespace {

struct Projected {
  Eigen::Vector3d p_cam;
  double u = 0.0;
  double v = 0.0;
  bool ok = false;
};

void check_inputs(const SemanticCloud& scan, std::span<const CameraObservation> cameras) {
  const std::size_t C = scan.num_classes();
  if (C < 2) throw ConfigError("scan has no class distributions");
  for (const auto& obs : cameras) {
    obs.camera.validate();
    if (obs.segmentation) {
      const auto& seg = *obs.segmentation;
      if (static_cast<std::size_t>(seg.num_classes()) != C)
        throw ConfigError("camera '" + obs.camera.name + "' segmentation has " + std::to_string(seg.num_classes()) +
                          " classes, scan has " + std::to_string(C));
      if (seg.width() != obs.camera.width || seg.height() != obs.camera.height)
        throw ConfigError("camera '" + obs.camera.name + "' segmentation size does not match its calibration");
    }
    for (const auto& det : obs.detections) {
      if (det.class_index >= C) throw ConfigError("detection class index exceeds class count");
      det.validate(C, obs.camera.width, obs.camera.height);
    }
  }
}

std::uint64_t point_class_key(std::size_t point, std::size_t cls) {
  return (static_cast<std::uint64_t>(point) << 8) | static_cast<std::uint64_t>(cls);
}

}  // namespace

SemanticCloud fuse_cloud(const SemanticCloud& scan, std::span<const CameraObservation> cameras,
                         const Trajectory& trajectory, const Eigen::Isometry3d& T_base_lidar,
                         const CloudFusionOptions& options, CloudFusionStats* stats) {
  check_inputs(scan, cameras);
  const std::size_t C = scan.num_classes();
  const std::size_t n = scan.size();

  SemanticCloud out = scan;
  if (options.prior == LidarPrior::uniform) {
    auto probs = out.probabilities();
    std::fill(probs.begin(), probs.end(), 1.0 / static_cast<double>(C));
  }

  bool any_detections = false;
  for (const auto& obs : cameras) any_detections |= !obs.detections.empty();
  std::vector<double> lidar_state;
  if (any_detections && options.border_reset == BorderReset::lidar_prior)
    lidar_state.assign(out.probabilities().begin(), out.probabilities().end());
  CloudFusionStats local;
  std::vector<std::uint8_t> in_camera(n, 0);
  std::vector<std::vector<Projected>> projections(cameras.size());
  std::vector<double> sample(C);

  for (std::size_t ci = 0; ci < cameras.size(); ++ci) {
    const auto& obs = cameras[ci];
    const Eigen::Isometry3d T =
        lidar_to_camera_transform(scan.timestamp, obs.timestamp, trajectory, obs.camera.T_cam_base, T_base_lidar);
    auto& proj = projections[ci];
    proj.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      Projected& pr = proj[i];
      pr.p_cam = T * scan.point(i).cast<double>();
      const PixelProjection px = project_pinhole(pr.p_cam, obs.camera);
      pr.u = px.u;
      pr.v = px.v;
      pr.ok = px.ok();
      if (!pr.ok || !obs.segmentation) continue;
      if (!sample_bilinear_into(obs.segmentation->probabilities, px.u, px.v, sample)) continue;
      if (bayes_fuse_into(out.distribution(i), sample) == FusionStatus::degenerate) ++local.degenerate_fusions;
      in_camera[i] = 1;
    }
  }
  local.points_in_camera = static_cast<std::size_t>(std::count(in_camera.begin(), in_camera.end(), std::uint8_t{1}));

  std::vector<double> fallback = std::move(lidar_state);
  if (any_detections && options.border_reset == BorderReset::pre_detection)
    fallback.assign(out.probabilities().begin(), out.probabilities().end());

  if (any_detections) {
    struct Ref {
      std::size_t camera;
      const Detection* det;
    };
    std::vector<Ref> order;
    for (std::size_t ci = 0; ci < cameras.size(); ++ci)
      for (const auto& det : cameras[ci].detections) order.push_back({ci, &det});
    std::stable_sort(order.begin(), order.end(),
                     [](const Ref& a, const Ref& b) { return detection_fusion_order(*a.det, *b.det); });

    std::unordered_set<std::uint64_t> clustered;
    std::vector<std::pair<std::size_t, std::size_t>> border;
    std::vector<std::size_t> box_index;
    std::vector<BoxPoint> box_points;
    std::vector<double> det_dist(C);

    for (const Ref& ref : order) {
      const Detection& det = *ref.det;
      const auto& proj = projections[ref.camera];
      box_index.clear();
      box_points.clear();
      for (std::size_t i = 0; i < n; ++i) {
        if (!proj[i].ok || !det.bbox.contains(proj[i].u, proj[i].v)) continue;
        box_index.push_back(i);
        box_points.push_back({proj[i].p_cam, proj[i].p_cam.z()});
      }
      if (box_index.empty()) continue;
      const ClusterResult cluster = cluster_bbox_points(box_points, options.lidar_model, options.cluster_factor);
      for (std::size_t k = 0; k < box_index.size(); ++k) {
        const std::size_t i = box_index[k];
        if (cluster.members[k]) {
          detection_distribution_into(det, proj[i].u, proj[i].v, det_dist);
          if (bayes_fuse_into(out.distribution(i), det_dist) == FusionStatus::degenerate) ++local.degenerate_fusions;
          clustered.insert(point_class_key(i, det.class_index));
          ++local.detection_members;
        } else {
          border.emplace_back(i, det.class_index);
        }
      }
    }

    if (options.border_reset != BorderReset::none) {
      for (const auto& [i, cls] : border) {
        if (clustered.count(point_class_key(i, cls))) continue;
        auto dist = out.distribution(i);
        if (argmax(dist) != cls) continue;
        const auto from = fallback.begin() + static_cast<std::ptrdiff_t>(i * C);
        if (!std::equal(dist.begin(), dist.end(), from)) ++local.border_resets;
        std::copy_n(from, C, dist.begin());
      }
    }
  }

  if (stats) *stats = local;
  return out;
}

}  // namespace semfuse
