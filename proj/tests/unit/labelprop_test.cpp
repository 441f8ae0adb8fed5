#include <cmath>

#include <gtest/gtest.h>

#include "semfuse/core/errors.hpp"
#include "semfuse/labelprop/ground_plane.hpp"
#include "semfuse/labelprop/pseudo_labels.hpp"
#include "semfuse/labelprop/training_sample.hpp"
#include "test_support.hpp"

namespace semfuse {
namespace {

// road, wall, person (dynamic), unknown
LabelSet street_labels() {
  return LabelSet({{"road", false, false}, {"wall", false, false}, {"person", true, false}, {"unknown", false, true}});
}
constexpr std::size_t kRoad = 0, kWall = 1, kPerson = 2;

SphericalModel small_model() {
  SphericalModel m;
  m.width = 360;
  m.height = 32;
  m.fov_up = 15.0 * std::numbers::pi / 180.0;
  m.fov_down = 15.0 * std::numbers::pi / 180.0;
  m.max_range = 30.0;
  return m;
}

void add_wall(SemanticCloud& c, double x, double p_wall) {
  for (double y = -2.0; y <= 2.0; y += 0.05)
    for (double z = -0.5; z <= 0.5; z += 0.05)
      c.push_back(Eigen::Vector3d(x, y, z).cast<float>(), 0.5f, test::peaked(4, kWall, p_wall));
}

void add_person(SemanticCloud& c, const Eigen::Vector3d& at) {
  for (double y = -0.2; y <= 0.2; y += 0.05)
    for (double z = -0.4; z <= 0.4; z += 0.05)
      c.push_back((at + Eigen::Vector3d(0, y, z)).cast<float>(), 0.5f, test::peaked(4, kPerson, 0.97));
}

Pose at_x(double x, double t = 0.0) {
  Pose p;
  p.t = t;
  p.translation = {x, 0.0, 0.0};
  return p;
}

VoxelMap map_of(const std::vector<SemanticCloud>& world_scans) {
  VoxelMap map(4);
  for (std::size_t s = 0; s < world_scans.size(); ++s) map.integrate_scan(world_scans[s], static_cast<std::int64_t>(s));
  return map;
}

PseudoLabelOptions options_for(const LabelSet& labels, double threshold = 0.8) {
  PseudoLabelOptions o;
  o.policy = ScanWindowPolicy::from_labels(labels, 2);
  o.threshold = threshold;
  o.model = small_model();
  return o;
}

TEST(PseudoLabels, StaticSurfaceSeenOnceIsLabeledFromEveryView) {
  const auto labels = street_labels();
  SemanticCloud first(4, "lidar");
  add_wall(first, 8.0, 0.95);
  const auto map = map_of({first});
  std::vector<SemanticCloud> clouds(5, SemanticCloud(4, "lidar"));
  clouds[0] = first;
  std::vector<ScanView> views;
  for (int s = 0; s < 5; ++s) views.push_back({s, at_x(0.5 * s), &clouds[static_cast<std::size_t>(s)]});
  const auto images = generate_pseudolabels(map, views, options_for(labels));
  ASSERT_EQ(images.size(), 5u);
  for (const auto& img : images) {
    EXPECT_GT(img.labeled_count(), 100u) << "view " << img.scan_id;
    for (std::size_t i = 0; i < img.labels.size(); ++i)
      if (img.labels[i] != kUnlabeled) {
        EXPECT_EQ(img.labels[i], kWall);
      }
  }
  // the wall is nearer to later viewpoints, so it covers more cells
  EXPECT_GT(images[4].labeled_count(), images[0].labeled_count());

  const auto overlay = single_overlay_pseudolabels(views[1], 0.8, small_model());
  EXPECT_EQ(overlay.labeled_count(), 0u);
  EXPECT_EQ(overlay.provenance, Provenance::single_overlay);
}

TEST(PseudoLabels, DynamicPointsStayWithinTheScanWindow) {
  const auto labels = street_labels();
  std::vector<SemanticCloud> clouds(6, SemanticCloud(4, "lidar"));
  add_person(clouds[0], {4.0, 0.0, 0.0});
  add_wall(clouds[0], 10.0, 0.95);
  const auto map = map_of({clouds[0]});
  std::vector<ScanView> views;
  for (int s = 0; s < 6; ++s) views.push_back({s, Pose{}, &clouds[static_cast<std::size_t>(s)]});
  const auto images = generate_pseudolabels(map, views, options_for(labels));
  for (const auto& img : images) {
    const auto persons = std::count(img.labels.begin(), img.labels.end(), static_cast<std::uint8_t>(kPerson));
    if (img.scan_id <= 2)
      EXPECT_GT(persons, 0) << "view " << img.scan_id;
    else
      EXPECT_EQ(persons, 0) << "view " << img.scan_id;
    EXPECT_GT(img.labeled_count(), 0u);
  }

  auto opts = options_for(labels);
  opts.policy.window = 0;
  const auto strict = generate_pseudolabels(map, views, opts);
  EXPECT_EQ(std::count(strict[1].labels.begin(), strict[1].labels.end(), static_cast<std::uint8_t>(kPerson)), 0);
  opts.policy.window = -1;
  EXPECT_THROW(generate_pseudolabels(map, views, opts), ConfigError);
}

TEST(PseudoLabels, ThresholdGatesMonotonically) {
  const auto labels = street_labels();
  std::vector<SemanticCloud> clouds(1, SemanticCloud(4, "lidar"));
  add_wall(clouds[0], 6.0, 0.7);
  add_wall(clouds[0], 12.0, 0.9);
  add_person(clouds[0], {3.0, 5.0, 0.0});
  const auto map = map_of(clouds);
  const std::vector<ScanView> views{{0, Pose{}, &clouds[0]}};
  std::size_t previous = std::numeric_limits<std::size_t>::max();
  for (double th : {0.0, 0.5, 0.8, 0.95, 0.99, 1.01}) {
    const auto img = generate_pseudolabels(map, views, options_for(labels, th)).front();
    EXPECT_LE(img.labeled_count(), previous) << "threshold " << th;
    previous = img.labeled_count();
  }
  EXPECT_EQ(previous, 0u);
}

TEST(PseudoLabels, EmptyMapYieldsUnlabeledImagesWithWarning) {
  const auto labels = street_labels();
  SemanticCloud cloud(4, "lidar");
  add_wall(cloud, 5.0, 0.95);
  const std::vector<ScanView> views{{0, Pose{}, &cloud}};
  const auto images = generate_pseudolabels(VoxelMap(4), views, options_for(labels));
  ASSERT_EQ(images.size(), 1u);
  EXPECT_EQ(images[0].labeled_count(), 0u);
  EXPECT_FALSE(images[0].warnings.empty());
}

TEST(PseudoLabels, SingleOverlayUsesOwnDistributions) {
  SemanticCloud cloud(4, "lidar");
  add_wall(cloud, 5.0, 0.95);
  const ScanView view{0, Pose{}, &cloud};
  const auto img = single_overlay_pseudolabels(view, 0.9, small_model());
  EXPECT_GT(img.labeled_count(), 0u);
  EXPECT_EQ(single_overlay_pseudolabels(view, 0.96, small_model()).labeled_count(), 0u);
}

TEST(Provenance, NamesRoundTrip) {
  for (auto p : {Provenance::single_overlay, Provenance::camonly_map, Provenance::fused_map})
    EXPECT_EQ(provenance_from_string(to_string(p)), p);
  EXPECT_THROW(provenance_from_string("oracle"), ConfigError);
}

struct GroundFixture {
  SemanticCloud cloud{4, "lidar"};
  RangeImage scan;
  PseudoLabelImage img;

  explicit GroundFixture(std::size_t ground_label) {
    for (double x = 2.0; x <= 20.0; x += 0.1)
      for (double y = -6.0; y <= 6.0; y += 0.1)
        cloud.push_back(Eigen::Vector3d(x, y, -1.5).cast<float>(), 0.f, test::peaked(4, ground_label, 0.97));
    for (double y = -4.0; y <= 4.0; y += 0.05)
      for (double z = -1.3; z <= 2.0; z += 0.05)
        cloud.push_back(Eigen::Vector3d(15.0, y, z).cast<float>(), 0.f, test::peaked(4, kWall, 0.97));
    scan = render_virtual_scan(cloud, Pose{}, small_model());
    img.height = scan.height;
    img.width = scan.width;
    img.labels = scan.label;
    img.confidence.assign(scan.size(), 1.0f);
    img.model = small_model();
  }

  std::size_t count(const std::vector<std::uint8_t>& l, std::size_t cls) const {
    return static_cast<std::size_t>(std::count(l.begin(), l.end(), static_cast<std::uint8_t>(cls)));
  }
};

TEST(GroundCorrection, UnlabelsNonGroundClassesOnThePlane) {
  GroundFixture f(kWall);
  const std::size_t before = f.count(f.img.labels, kWall);
  const auto out = ground_plane_correction(f.img, f.scan, {kRoad});
  EXPECT_TRUE(out.warnings.empty());
  const std::size_t after = f.count(out.labels, kWall);
  EXPECT_LT(after, before);
  EXPECT_GT(after, 0u);  // the upright wall survives
  for (std::size_t i = 0; i < f.scan.size(); ++i)
    if (f.scan.valid(i) && f.scan.z[i] > -1.0f) {
      EXPECT_EQ(out.labels[i], f.img.labels[i]);
    }

  const auto twice = ground_plane_correction(out, f.scan, {kRoad});
  EXPECT_EQ(twice.labels, out.labels);
}

TEST(GroundCorrection, KeepsGroundClasses) {
  GroundFixture f(kRoad);
  const auto out = ground_plane_correction(f.img, f.scan, {kRoad});
  EXPECT_EQ(out.labels, f.img.labels);
}

TEST(GroundCorrection, TooFewPointsLeavesLabelsWithWarning) {
  GroundFixture f(kWall);
  GroundPlaneOptions opts;
  opts.min_candidates = 1000000;
  const auto out = ground_plane_correction(f.img, f.scan, {kRoad}, opts);
  EXPECT_EQ(out.labels, f.img.labels);
  EXPECT_EQ(out.warnings.size(), 1u);
  RangeImage wrong(4, 4, true);
  EXPECT_THROW(ground_plane_correction(f.img, wrong, {kRoad}), ContractViolation);
}

TEST(GroundPlane, RecoversATiltedPlane) {
  std::vector<Eigen::Vector3d> pts;
  for (double x = -5; x <= 5; x += 0.25)
    for (double y = -5; y <= 5; y += 0.25) pts.emplace_back(x, y, 0.02 * x - 1.0);
  const auto plane = fit_ground_plane(pts);
  ASSERT_TRUE(plane.has_value());
  EXPECT_GT(plane->normal.z(), 0.0);
  EXPECT_NEAR(plane->distance({3.0, 2.0, 0.06 - 1.0}), 0.0, 1e-9);
  EXPECT_NEAR(plane->distance({0.0, 0.0, 0.0}), 1.0 / std::sqrt(1.0 + 0.0004), 1e-9);
  EXPECT_FALSE(fit_ground_plane({pts.begin(), pts.begin() + 10}).has_value());
}

TEST(TrainingSample, ChannelsFollowScanGeometry) {
  const auto labels = street_labels();
  GroundFixture f(kRoad);
  const auto four = make_training_sample(f.scan, f.img, false, labels);
  const auto five = make_training_sample(f.scan, f.img, true, labels);
  EXPECT_EQ(four.channels, 4);
  EXPECT_EQ(five.channels, 5);
  ASSERT_EQ(four.data.size(), f.scan.size() * 4);
  for (std::size_t i = 0; i < f.scan.size(); ++i) {
    EXPECT_EQ(four.data[i * 4 + 0], f.scan.range[i]);
    EXPECT_EQ(four.data[i * 4 + 3], f.scan.z[i]);
    EXPECT_EQ(five.data[i * 5 + 4], f.scan.intensity[i]);
    if (!f.scan.valid(i)) {
      EXPECT_EQ(four.labels[i], kUnlabeled);
    }
  }

  PseudoLabelImage none = f.img;
  std::fill(none.labels.begin(), none.labels.end(), kUnlabeled);
  const auto blank = make_training_sample(f.scan, none, false, labels);
  EXPECT_TRUE(std::all_of(blank.labels.begin(), blank.labels.end(), [](auto l) { return l == kUnlabeled; }));

  PseudoLabelImage small = f.img;
  small.height = 2;
  EXPECT_THROW(make_training_sample(f.scan, small, false, labels), ContractViolation);
}

TEST(TrainingSample, WriteReadRoundTrip) {
  const auto labels = street_labels();
  GroundFixture f(kWall);
  test::TempDir dir;
  const auto sample = make_training_sample(f.scan, f.img, true, labels);
  write_training_sample(dir.path(), sample);
  const auto back = read_training_sample(dir.path());
  EXPECT_EQ(back.height, sample.height);
  EXPECT_EQ(back.width, sample.width);
  EXPECT_EQ(back.channels, 5);
  EXPECT_EQ(back.data, sample.data);
  EXPECT_EQ(back.labels, sample.labels);
}

}  // namespace
}  // namespace semfuse
