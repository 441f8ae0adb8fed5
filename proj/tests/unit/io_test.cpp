#include <cmath>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "semfuse/core/errors.hpp"
#include "semfuse/io/calibration.hpp"
#include "semfuse/io/cloud_file.hpp"
#include "semfuse/io/detections_jsonl.hpp"
#include "semfuse/io/frame_file.hpp"
#include "semfuse/io/map_snapshot.hpp"
#include "semfuse/io/trajectory_csv.hpp"
#include "semfuse/synth/scene.hpp"
#include "test_support.hpp"

namespace semfuse {
namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

template <typename Fn>
std::size_t parse_error_line(Fn&& fn) {
  try {
    fn();
  } catch (const ParseError& e) {
    return e.line();
  }
  ADD_FAILURE() << "no ParseError";
  return 0;
}

TEST(CloudFile, RoundTripKeepsPointsAndDistributions) {
  test::TempDir dir;
  const auto labels = LabelSet::defaults();
  std::mt19937_64 rng(1);
  SemanticCloud cloud(labels.size(), "lidar", 12.5);
  for (int i = 0; i < 200; ++i)
    cloud.push_back({0.5f * i, -1.25f, 3.f}, 0.01f * i, test::random_distribution(rng, labels.size()));
  io::save_cloud(dir / "a.cloud", cloud, labels);
  const auto back = io::load_cloud(dir / "a.cloud", labels);
  ASSERT_EQ(back.size(), cloud.size());
  EXPECT_EQ(back.frame_id, "lidar");
  EXPECT_DOUBLE_EQ(back.timestamp, 12.5);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    EXPECT_EQ(back.point(i), cloud.point(i));
    EXPECT_EQ(back.intensity(i), cloud.intensity(i));
    for (std::size_t k = 0; k < labels.size(); ++k) EXPECT_NEAR(back.distribution(i)[k], cloud.distribution(i)[k], 1e-6);
  }
}

TEST(CloudFile, EmptyCloudRoundTrips) {
  test::TempDir dir;
  const auto labels = test::three_class_labels();
  io::save_cloud(dir / "e.cloud", SemanticCloud(3, "world"), labels);
  EXPECT_TRUE(io::load_cloud(dir / "e.cloud", labels).empty());
}

TEST(CloudFile, RejectsForeignLabelSet) {
  test::TempDir dir;
  SemanticCloud cloud(3, "world");
  cloud.push_back_uniform({0, 0, 0}, 0.f);
  io::save_cloud(dir / "c.cloud", cloud, test::three_class_labels());
  const LabelSet other({{"x", false, false}, {"y", false, false}, {"unknown", false, true}});
  EXPECT_THROW(io::load_cloud(dir / "c.cloud", other), ConfigError);
}

TEST(CloudFile, TruncatedPayloadIsAParseError) {
  test::TempDir dir;
  const auto labels = test::three_class_labels();
  SemanticCloud cloud(3, "world");
  for (int i = 0; i < 10; ++i) cloud.push_back_uniform({0, 0, 0}, 0.f);
  io::save_cloud(dir / "t.cloud", cloud, labels);
  std::filesystem::resize_file(dir / "t.cloud", std::filesystem::file_size(dir / "t.cloud") - 8);
  EXPECT_THROW(io::load_cloud(dir / "t.cloud", labels), ParseError);
  write_text(dir / "junk.cloud", "hello\n");
  EXPECT_THROW(io::load_cloud(dir / "junk.cloud", labels), ParseError);
}

TEST(FrameFile, RoundTripWithDepth) {
  test::TempDir dir;
  const auto labels = test::three_class_labels();
  std::mt19937_64 rng(2);
  SegmentationFrame f;
  f.probabilities = ClassGrid(4, 5, 3);
  f.timestamp = 0.3;
  f.camera = "thermal";
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 5; ++c) {
      const auto p = test::random_distribution(rng, 3);
      for (int k = 0; k < 3; ++k) f.probabilities.at(r, c)[k] = static_cast<float>(p[k]);
    }
  f.depth.assign(20, 4.5f);
  f.depth[3] = std::nanf("");
  io::save_frame(dir / "f.seg", f, labels);
  const auto g = io::load_frame(dir / "f.seg", labels);
  EXPECT_EQ(g.height(), 4);
  EXPECT_EQ(g.width(), 5);
  EXPECT_EQ(g.camera, "thermal");
  EXPECT_DOUBLE_EQ(g.timestamp, 0.3);
  ASSERT_TRUE(g.has_depth());
  EXPECT_TRUE(std::isnan(g.depth[3]));
  EXPECT_EQ(g.depth[0], 4.5f);
  for (std::size_t i = 0; i < f.probabilities.data.size(); ++i)
    EXPECT_NEAR(g.probabilities.data[i], f.probabilities.data[i], 1e-6);
}

TEST(FrameFile, RoundTripWithoutDepth) {
  test::TempDir dir;
  const auto labels = test::two_class_labels();
  SegmentationFrame f;
  f.probabilities = ClassGrid(2, 2, 2);
  for (auto& v : f.probabilities.data) v = 0.5f;
  io::save_frame(dir / "f.seg", f, labels);
  EXPECT_FALSE(io::load_frame(dir / "f.seg", labels).has_depth());
}

TEST(MapSnapshot, RoundTripKeepsInfiniteState) {
  test::TempDir dir;
  const auto labels = test::three_class_labels();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<float> u(-2.f, 2.f);
  VoxelMapConfig cfg;
  cfg.voxel_size = 0.5;
  VoxelMap map(3, cfg);
  for (int s = 0; s < 4; ++s) {
    SemanticCloud scan(3, "world");
    for (int i = 0; i < 100; ++i) scan.push_back({u(rng), u(rng), u(rng)}, 0.f, test::random_distribution(rng, 3));
    map.integrate_scan(scan, s);
  }
  io::save_map_snapshot(dir / "m.map", map, labels);
  const auto back = io::load_map_snapshot(dir / "m.map", labels);
  EXPECT_EQ(back.size(), map.size());
  EXPECT_DOUBLE_EQ(back.config().voxel_size, 0.5);
  for (const auto& key : map.sorted_keys()) {
    const auto a = map.query(key), b = back.query(key);
    ASSERT_TRUE(b.has_value());
    EXPECT_EQ(a->n_points, b->n_points);
    EXPECT_TRUE(a->mean_pos.isApprox(b->mean_pos, 1e-6));
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(a->distribution[k], b->distribution[k], 1e-6);
  }
}

TEST(Calibration, RoundTripWithThermalCamera) {
  test::TempDir dir;
  io::Calibration calib;
  CameraModel rgb;
  rgb.fx = rgb.fy = 200;
  rgb.cx = 160;
  rgb.cy = 120;
  rgb.width = 320;
  rgb.height = 240;
  rgb.T_cam_base = synth::forward_camera_extrinsic({0.1, 0.0, 0.2});
  CameraModel thermal = rgb;
  thermal.name = "thermal";
  thermal.width = 160;
  calib.cameras = {rgb, thermal};
  calib.T_base_lidar.translation() << 0.0, 0.0, 1.0;
  io::save_calibration(dir / "calib.json", calib);
  const auto back = io::load_calibration(dir / "calib.json");
  ASSERT_EQ(back.cameras.size(), 2u);
  EXPECT_EQ(back.camera("thermal").width, 160);
  EXPECT_TRUE(back.camera("rgb").T_cam_base.isApprox(rgb.T_cam_base, 1e-12));
  EXPECT_TRUE(back.T_base_lidar.isApprox(calib.T_base_lidar, 1e-12));
  EXPECT_EQ(back.lidar.width, calib.lidar.width);
  EXPECT_NEAR(back.lidar.fov_up, calib.lidar.fov_up, 1e-12);
  EXPECT_THROW((void)back.camera("depth"), ConfigError);
}

TEST(Calibration, RejectsLensDistortionAndBadTransforms) {
  io::Calibration calib;
  CameraModel rgb;
  rgb.fx = rgb.fy = 100;
  rgb.width = rgb.height = 10;
  calib.cameras = {rgb};
  auto doc = io::calibration_to_json(calib);
  EXPECT_NO_THROW(io::calibration_from_json(doc));
  auto distorted = doc;
  distorted["camera"]["distortion"] = {0.1, 0.0, 0.0, 0.0};
  EXPECT_THROW(io::calibration_from_json(distorted), ConfigError);
  distorted["camera"]["distortion"] = {0.0, 0.0};
  EXPECT_NO_THROW(io::calibration_from_json(distorted));
  auto skewed = doc;
  skewed["camera"]["T_cam_base"][0] = 2.0;
  EXPECT_THROW(io::calibration_from_json(skewed), ConfigError);
  auto missing = doc;
  missing.erase("lidar");
  EXPECT_THROW(io::calibration_from_json(missing), ConfigError);
}

TEST(TrajectoryCsv, RoundTripIsExact) {
  test::TempDir dir;
  std::vector<Pose> poses;
  for (int i = 0; i < 5; ++i) {
    Pose p;
    p.t = 0.1 * i;
    p.translation = {1.0 / 3.0 * i, -0.7, 2.0};
    p.rotation = Eigen::Quaterniond(Eigen::AngleAxisd(0.1 * i, Eigen::Vector3d::UnitZ()));
    poses.push_back(p);
  }
  const Trajectory traj(poses);
  io::save_trajectory_csv(dir / "t.csv", traj);
  const auto back = io::load_trajectory_csv(dir / "t.csv");
  ASSERT_EQ(back.poses().size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(back.poses()[i].t, poses[i].t);
    EXPECT_EQ(back.poses()[i].translation, poses[i].translation);
    EXPECT_NEAR(back.poses()[i].rotation.angularDistance(poses[i].rotation), 0.0, 1e-12);
  }
}

TEST(TrajectoryCsv, ParseErrorsNameTheLine) {
  test::TempDir dir;
  const std::string header = "t,tx,ty,tz,qw,qx,qy,qz\n";
  write_text(dir / "a.csv", header + "0,0,0,0,1,0,0,0\n0.1,0,0,zz,1,0,0,0\n");
  EXPECT_EQ(parse_error_line([&] { io::load_trajectory_csv(dir / "a.csv"); }), 3u);
  write_text(dir / "b.csv", header + "0,0,0,0,1,0,0,0\n\n0.1,0,0,0,1,0,0\n");
  EXPECT_EQ(parse_error_line([&] { io::load_trajectory_csv(dir / "b.csv"); }), 4u);
  write_text(dir / "c.csv", "time,x\n");
  EXPECT_EQ(parse_error_line([&] { io::load_trajectory_csv(dir / "c.csv"); }), 1u);
  write_text(dir / "d.csv", header + "0.2,0,0,0,1,0,0,0\n0.1,0,0,0,1,0,0,0\n");
  EXPECT_THROW(io::load_trajectory_csv(dir / "d.csv"), ParseError);
}

TEST(DetectionsJsonl, RoundTripAndLineNumbers) {
  test::TempDir dir;
  const auto labels = LabelSet::defaults();
  std::vector<Detection> dets(2);
  dets[0].class_index = labels.require("person");
  dets[0].score = 0.75;
  dets[0].bbox = {10, 20, 30, 60};
  dets[0].t = 1.5;
  dets[1].class_index = labels.require("vehicle");
  dets[1].score = 0.5;
  dets[1].bbox = {0, 0, 5, 5};
  dets[1].source = DetectionSource::thermal;
  io::save_detections(dir / "d.jsonl", dets, labels);
  const auto back = io::load_detections(dir / "d.jsonl", labels);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].class_index, dets[0].class_index);
  EXPECT_EQ(back[0].bbox.y_max, 60.0);
  EXPECT_EQ(back[1].source, DetectionSource::thermal);
  EXPECT_DOUBLE_EQ(back[0].t, 1.5);

  write_text(dir / "bad.jsonl",
             "{\"t\":0,\"source\":\"rgb\",\"class\":\"person\",\"score\":0.5,\"bbox\":[0,0,1,1]}\n\n"
             "{\"t\":0,\"source\":\"rgb\",\"class\":\"dragon\",\"score\":0.5,\"bbox\":[0,0,1,1]}\n");
  EXPECT_EQ(parse_error_line([&] { io::load_detections(dir / "bad.jsonl", labels); }), 3u);
  write_text(dir / "short.jsonl", "{\"t\":0,\"source\":\"rgb\",\"class\":\"person\",\"score\":0.5,\"bbox\":[0,0,1]}\n");
  EXPECT_EQ(parse_error_line([&] { io::load_detections(dir / "short.jsonl", labels); }), 1u);
  write_text(dir / "broken.jsonl", "{not json\n");
  EXPECT_EQ(parse_error_line([&] { io::load_detections(dir / "broken.jsonl", labels); }), 1u);
}

TEST(LabelSetFile, SaveLoadPreservesHash) {
  test::TempDir dir;
  const auto labels = LabelSet::defaults();
  labels.save((dir / "labels.json").string());
  EXPECT_EQ(LabelSet::load((dir / "labels.json").string()).hash(), labels.hash());
}

}  // namespace
}  // namespace semfuse
