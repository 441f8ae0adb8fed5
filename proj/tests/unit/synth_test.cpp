#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "semfuse/core/errors.hpp"
#include "semfuse/synth/scene.hpp"
#include "semfuse/synth/simulate.hpp"
#include "test_support.hpp"

namespace semfuse::synth {
namespace {

SceneSpec small_scene(const LabelSet& labels) {
  SceneSpec s;
  s.name = "unit";
  s.lidar.width = 256;
  s.lidar.height = 16;
  s.lidar.fov_up = 10.0 * std::numbers::pi / 180.0;
  s.lidar.fov_down = 20.0 * std::numbers::pi / 180.0;
  s.lidar.max_range = 40.0;
  s.camera.fx = s.camera.fy = 100.0;
  s.camera.cx = 80.0;
  s.camera.cy = 60.0;
  s.camera.width = 160;
  s.camera.height = 120;
  s.camera.T_cam_base = forward_camera_extrinsic();
  s.trajectory.start = {0.0, 0.0, 1.5};
  s.noise.camera.temperature = 5.0;
  s.noise.lidar.temperature = 6.0;
  (void)labels;
  return s;
}

Primitive road_plane(const LabelSet& labels) {
  Primitive p;
  p.shape = Shape::plane;
  p.class_index = labels.require("road");
  p.anchor = Eigen::Vector3d::Zero();
  return p;
}

Primitive person_at(const LabelSet& labels, const Eigen::Vector3d& base) {
  Primitive p;
  p.shape = Shape::cylinder;
  p.class_index = labels.require("person");
  p.anchor = base;
  p.radius = 0.3;
  p.height = 1.8;
  return p;
}

Eigen::Isometry3d camera_pose(const SceneSpec& s) {
  return s.trajectory.pose_at(0.0).isometry() * s.camera.T_cam_base.inverse();
}

TEST(Synth, EmptySceneHasNoReturns) {
  const auto labels = LabelSet::defaults();
  const auto scene = small_scene(labels);
  const auto scan = simulate_scan(scene, labels, 0.0, Eigen::Isometry3d::Identity(), 0);
  EXPECT_EQ(scan.image.valid_count(), 0u);
  EXPECT_TRUE(scan.observed.empty());
  const auto frame = simulate_segmentation(scene, labels, 0.0, camera_pose(scene), 0);
  EXPECT_TRUE(std::all_of(frame.truth.begin(), frame.truth.end(), [&](auto c) { return c == labels.require("sky"); }));
}

TEST(Synth, GroundPlaneFillsDownwardRowsAtAnalyticRange) {
  const auto labels = LabelSet::defaults();
  auto scene = small_scene(labels);
  scene.primitives.push_back(road_plane(labels));
  const Eigen::Isometry3d pose = scene.trajectory.pose_at(0.0).isometry();
  const auto scan = simulate_scan(scene, labels, 0.0, pose, 0);
  for (int row = 0; row < scene.lidar.height; ++row) {
    const Eigen::Vector3d ray = cell_ray(row, 0, scene.lidar);
    const std::size_t idx = scan.image.index(row, 0);
    const double expected = ray.z() < 0.0 ? 1.5 / -ray.z() : 0.0;
    if (expected > 0.0 && expected <= scene.lidar.max_range) {
      ASSERT_TRUE(scan.image.valid(idx)) << "row " << row;
      EXPECT_NEAR(scan.image.range[idx], expected, 1e-4 * expected);
      EXPECT_EQ(scan.image.label[idx], labels.require("road"));
    } else {
      EXPECT_FALSE(scan.image.valid(idx)) << "row " << row;
    }
  }
}

TEST(Synth, NoiselessObservationsAreOneHot) {
  const auto labels = LabelSet::defaults();
  LabelNoise noise{0.0, std::numeric_limits<double>::infinity()};
  std::mt19937_64 rng(1);
  std::vector<double> out(labels.size());
  for (std::size_t c = 0; c < labels.size(); ++c) {
    observe_class(c, noise, rng, out);
    EXPECT_EQ(argmax(out), c);
    EXPECT_EQ(out[c], 1.0);
    EXPECT_EQ(std::accumulate(out.begin(), out.end(), 0.0), 1.0);
  }
}

TEST(Synth, FullFlipWithTwoClassesInverts) {
  LabelNoise noise{1.0, 4.0};
  std::mt19937_64 rng(2);
  std::vector<double> out(2);
  for (int i = 0; i < 100; ++i) {
    observe_class(0, noise, rng, out);
    EXPECT_EQ(argmax(out), 1u);
    EXPECT_NEAR(out[1], 1.0 / (1.0 + std::exp(-4.0)), 1e-15);
  }
}

TEST(Synth, CalibratedNoisePeaksAtAccuracy) {
  std::mt19937_64 rng(4);
  std::vector<double> out(15);
  for (double rate : {0.05, 0.3}) {
    const auto noise = LabelNoise::calibrated(rate, 15);
    observe_class(2, LabelNoise{0.0, noise.temperature}, rng, out);
    EXPECT_NEAR(out[2], 1.0 - rate, 1e-12);
  }
  EXPECT_TRUE(std::isinf(LabelNoise::calibrated(0.0, 15).temperature));
  EXPECT_THROW(LabelNoise::calibrated(1.0, 15), ConfigError);
}

TEST(SynthProperty, FlipRateMatchesWithinThreeSigma) {
  for (double rate : {0.05, 0.2, 0.5}) {
    LabelNoise noise{rate, 5.0};
    std::mt19937_64 rng(3);
    std::vector<double> out(15);
    const int n = 20000;
    int flips = 0;
    for (int i = 0; i < n; ++i) {
      observe_class(4, noise, rng, out);
      flips += argmax(out) != 4;
    }
    const double sigma = std::sqrt(rate * (1 - rate) / n);
    EXPECT_NEAR(static_cast<double>(flips) / n, rate, 3 * sigma) << "rate " << rate;
  }
}

TEST(Synth, DetectionBoxCoversEveryPersonPixel) {
  const auto labels = LabelSet::defaults();
  auto scene = small_scene(labels);
  scene.primitives.push_back(road_plane(labels));
  scene.primitives.push_back(person_at(labels, {6.0, 0.5, 0.0}));
  const auto frame = simulate_segmentation(scene, labels, 0.0, camera_pose(scene), 0);
  const auto dets = simulate_detections(scene, labels, frame, 0);
  ASSERT_EQ(dets.size(), 1u);
  EXPECT_EQ(dets[0].class_index, labels.require("person"));
  EXPECT_DOUBLE_EQ(dets[0].score, 0.9);
  std::size_t person_pixels = 0;
  for (int r = 0; r < scene.camera.height; ++r)
    for (int c = 0; c < scene.camera.width; ++c) {
      if (frame.primitive[static_cast<std::size_t>(r) * scene.camera.width + c] != 1) continue;
      ++person_pixels;
      EXPECT_TRUE(dets[0].bbox.contains(c, r));
    }
  EXPECT_GT(person_pixels, 50u);
  EXPECT_NO_THROW(dets[0].validate(labels.size(), scene.camera.width, scene.camera.height));
}

TEST(Synth, PersonBehindCameraIsNotDetected) {
  const auto labels = LabelSet::defaults();
  auto scene = small_scene(labels);
  scene.primitives.push_back(road_plane(labels));
  scene.primitives.push_back(person_at(labels, {-6.0, 0.0, 0.0}));
  const auto frame = simulate_segmentation(scene, labels, 0.0, camera_pose(scene), 0);
  EXPECT_TRUE(simulate_detections(scene, labels, frame, 0).empty());
}

TEST(SynthProperty, FalsePositiveRate) {
  const auto labels = LabelSet::defaults();
  auto scene = small_scene(labels);
  scene.noise.false_rate = 0.3;
  scene.camera.width = 8;
  scene.camera.height = 6;
  scene.camera.cx = 4;
  scene.camera.cy = 3;
  const auto frame = simulate_segmentation(scene, labels, 0.0, camera_pose(scene), 0);
  const int n = 4000;
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    const auto dets = simulate_detections(scene, labels, frame, i);
    hits += static_cast<int>(dets.size());
    for (const auto& d : dets) EXPECT_TRUE(labels.is_dynamic(d.class_index));
  }
  EXPECT_NEAR(static_cast<double>(hits) / n, 0.3, 3 * std::sqrt(0.3 * 0.7 / n));
}

TEST(Synth, TruthDoesNotDependOnSeed) {
  const auto labels = LabelSet::defaults();
  auto scene = small_scene(labels);
  scene.primitives.push_back(road_plane(labels));
  scene.primitives.push_back(person_at(labels, {6.0, 0.0, 0.0}));
  scene.noise.lidar.flip_rate = 0.3;
  const auto pose = scene.trajectory.pose_at(0.0).isometry();
  const auto a = simulate_scan(scene, labels, 0.0, pose, 0);
  scene.noise.seed = 99;
  const auto b = simulate_scan(scene, labels, 0.0, pose, 0);
  EXPECT_EQ(a.truth, b.truth);
  EXPECT_EQ(a.image.range, b.image.range);
  bool differs = false;
  for (std::size_t i = 0; i < a.observed.size() && !differs; ++i)
    differs = argmax(a.observed.distribution(i)) != argmax(b.observed.distribution(i));
  EXPECT_TRUE(differs);
  const auto again = simulate_scan(scene, labels, 0.0, pose, 0);
  EXPECT_EQ(std::vector<double>(again.observed.probabilities().begin(), again.observed.probabilities().end()),
            std::vector<double>(b.observed.probabilities().begin(), b.observed.probabilities().end()));
}

TEST(Scene, JsonRoundTripAndFixturesLoad) {
  const auto labels = LabelSet::defaults();
  for (const char* name : {"person_wall.json", "walking_person.json", "campus_block.json"}) {
    const auto scene = load_scene(test::scenes_dir() / name, labels);
    EXPECT_FALSE(scene.primitives.empty()) << name;
    const auto back = scene_from_json(scene_to_json(scene, labels), labels);
    EXPECT_EQ(back.primitives.size(), scene.primitives.size());
    EXPECT_EQ(back.trajectory.frame_count(), scene.trajectory.frame_count());
    EXPECT_TRUE(back.camera.T_cam_base.isApprox(scene.camera.T_cam_base, 1e-12));
  }
}

TEST(Scene, RejectsInvalidNoise) {
  NoiseSpec n;
  n.lidar.flip_rate = 1.5;
  EXPECT_THROW(n.validate(), ConfigError);
  n = {};
  n.score_min = 0.0;
  EXPECT_THROW(n.validate(), ConfigError);
}

TEST(Scene, RayHitsNearestSurface) {
  const auto labels = LabelSet::defaults();
  auto scene = small_scene(labels);
  Primitive wall;
  wall.shape = Shape::box;
  wall.class_index = labels.require("building");
  wall.anchor = {10.0, 0.0, 0.0};
  wall.size = {1.0, 4.0, 4.0};
  scene.primitives.push_back(wall);
  scene.primitives.push_back(person_at(labels, {5.0, 0.0, -1.0}));
  const auto hit = cast_ray(scene, Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitX(), 0.0, 100.0);
  ASSERT_TRUE(hit.has_value());
  EXPECT_EQ(hit->primitive, 1u);
  EXPECT_NEAR(hit->distance, 4.7, 1e-9);
  scene.primitives[1].velocity = {0.0, 10.0, 0.0};
  const auto later = cast_ray(scene, Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitX(), 1.0, 100.0);
  ASSERT_TRUE(later.has_value());
  EXPECT_EQ(later->primitive, 0u);
  EXPECT_NEAR(later->distance, 9.5, 1e-9);
  EXPECT_FALSE(cast_ray(scene, Eigen::Vector3d::Zero(), -Eigen::Vector3d::UnitX(), 0.0, 100.0).has_value());
}

}  // namespace
}  // namespace semfuse::synth
