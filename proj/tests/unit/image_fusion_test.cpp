#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "semfuse/core/errors.hpp"
#include "semfuse/core/probability.hpp"
#include "semfuse/fusion/image_fusion.hpp"
#include "test_support.hpp"

namespace semfuse {
namespace {

constexpr int H = 20, W = 30, C = 3;

CameraModel small_camera() {
  CameraModel cam;
  cam.fx = cam.fy = 100.0;
  cam.cx = 15.0;
  cam.cy = 10.0;
  cam.width = W;
  cam.height = H;
  return cam;
}

SegmentationFrame filled(std::vector<float> p, float depth = std::numeric_limits<float>::quiet_NaN()) {
  SegmentationFrame f;
  f.probabilities = ClassGrid(H, W, C);
  for (int r = 0; r < H; ++r)
    for (int c = 0; c < W; ++c) std::copy(p.begin(), p.end(), f.probabilities.at(r, c).begin());
  if (!std::isnan(depth)) f.depth.assign(static_cast<std::size_t>(H) * W, depth);
  return f;
}

SegmentationFrame random_frame(std::mt19937_64& rng, float depth) {
  SegmentationFrame f = filled({1.f / 3, 1.f / 3, 1.f / 3}, depth);
  for (int r = 0; r < H; ++r)
    for (int c = 0; c < W; ++c) {
      const auto p = test::random_distribution(rng, C);
      for (int k = 0; k < C; ++k) f.probabilities.at(r, c)[k] = static_cast<float>(p[k]);
    }
  return f;
}

const std::vector<double> kAlphas{0.8, 0.25, 0.25};

TEST(SmoothAndFuse, NoHistoryNoDetectionsIsIdentity) {
  std::mt19937_64 rng(1);
  const auto cur = random_frame(rng, 5.0f);
  const auto out = smooth_and_fuse_image(cur, nullptr, Eigen::Isometry3d::Identity(), small_camera(), {}, kAlphas);
  EXPECT_EQ(out.probabilities.data, cur.probabilities.data);
}

TEST(SmoothAndFuse, IdenticalStaticFramesAreAFixedPoint) {
  std::mt19937_64 rng(2);
  const auto cur = random_frame(rng, 5.0f);
  const auto out = smooth_and_fuse_image(cur, &cur, Eigen::Isometry3d::Identity(), small_camera(), {}, kAlphas);
  for (std::size_t i = 0; i < cur.probabilities.data.size(); ++i)
    EXPECT_NEAR(out.probabilities.data[i], cur.probabilities.data[i], 1e-6);
}

TEST(SmoothAndFuse, BlendUsesPerClassWeights) {
  const auto prev = filled({1.f, 0.f, 0.f}, 4.0f);
  const auto cur = filled({0.f, 1.f, 0.f}, 4.0f);
  const std::vector<double> alphas{0.25, 0.25, 0.25};
  const auto out = smooth_frame(cur, &prev, Eigen::Isometry3d::Identity(), small_camera(), alphas);
  const auto px = out.probabilities.at(7, 11);
  EXPECT_NEAR(px[0], 0.75, 1e-7);
  EXPECT_NEAR(px[1], 0.25, 1e-7);
  EXPECT_NEAR(px[2], 0.0, 1e-7);
}

TEST(SmoothAndFuse, ForwardWarpFollowsCameraMotion) {
  auto prev = filled({1.f, 0.f, 0.f}, 10.0f);
  for (int r = 0; r < H; ++r) {
    auto px = prev.probabilities.at(r, 12);
    px[0] = 0.f;
    px[1] = 1.f;
  }
  const auto cur = filled({0.f, 0.f, 1.f}, 10.0f);
  // 0.1 m sideways at 10 m depth and fx = 100 is one pixel.
  const Eigen::Isometry3d motion(Eigen::Translation3d(0.1, 0.0, 0.0));
  const auto out = smooth_frame(cur, &prev, motion, small_camera(), std::vector<double>(C, 0.5));
  EXPECT_NEAR(out.probabilities.at(5, 13)[1], 0.5, 1e-6);
  EXPECT_NEAR(out.probabilities.at(5, 12)[0], 0.5, 1e-6);
  // Column 0 has no warped source and keeps the current distribution.
  EXPECT_EQ(out.probabilities.at(5, 0)[2], 1.f);
}

TEST(SmoothAndFuseProperty, UnitAlphaReducesToDetectionFusion) {
  std::mt19937_64 rng(3);
  const auto prev = random_frame(rng, 5.0f);
  const auto cur = random_frame(rng, 5.0f);
  Detection det;
  det.class_index = 1;
  det.score = 0.8;
  det.bbox = {3.5, 2.0, 17.2, 14.9};
  const std::vector<Detection> dets{det};
  const auto out =
      smooth_and_fuse_image(cur, &prev, Eigen::Isometry3d::Identity(), small_camera(), dets, std::vector<double>(C, 1.0));
  SegmentationFrame expected = cur;
  fuse_detections_into(expected, dets);
  for (std::size_t i = 0; i < cur.probabilities.data.size(); ++i)
    EXPECT_NEAR(out.probabilities.data[i], expected.probabilities.data[i], 1e-6);
}

TEST(SmoothAndFuse, DetectionsOnlyTouchPixelsInsideTheBox) {
  const auto cur = filled({1.f / 3, 1.f / 3, 1.f / 3}, 5.0f);
  Detection det;
  det.class_index = 2;
  det.score = 0.9;
  det.bbox = {4.0, 4.0, 8.0, 6.0};
  const auto out = smooth_and_fuse_image(cur, nullptr, Eigen::Isometry3d::Identity(), small_camera(),
                                         std::vector<Detection>{det}, kAlphas);
  EXPECT_NEAR(out.probabilities.at(5, 6)[2], 0.9, 1e-6);
  EXPECT_GT(out.probabilities.at(4, 5)[2], 1.f / 3);
  // At the corner the Gaussian weight 0.9 e^-1 falls just below uniform.
  EXPECT_NEAR(out.probabilities.at(4, 4)[2], 0.9 * std::exp(-1.0), 1e-6);
  EXPECT_FLOAT_EQ(out.probabilities.at(3, 6)[2], 1.f / 3);
  EXPECT_FLOAT_EQ(out.probabilities.at(5, 9)[2], 1.f / 3);
}

TEST(SmoothAndFuseProperty, OutputsStayNormalized) {
  std::mt19937_64 rng(4);
  SegmentationFrame prev = random_frame(rng, 6.0f);
  for (int step = 0; step < 10; ++step) {
    const auto cur = random_frame(rng, 6.0f);
    Detection det;
    det.class_index = step % C;
    det.score = 0.7;
    det.bbox = {1.0 + step, 2.0, 12.0 + step, 15.0};
    const Eigen::Isometry3d motion(Eigen::Translation3d(0.05 * step, 0.0, 0.02));
    prev = smooth_and_fuse_image(cur, &prev, motion, small_camera(), std::vector<Detection>{det}, kAlphas);
    prev.depth = cur.depth;
    EXPECT_NO_THROW(prev.validate());
  }
}

TEST(SmoothAndFuse, ContractErrors) {
  const auto cur = filled({1.f / 3, 1.f / 3, 1.f / 3}, 5.0f);
  const auto no_depth = filled({1.f / 3, 1.f / 3, 1.f / 3});
  const auto cam = small_camera();
  EXPECT_THROW(smooth_frame(cur, &no_depth, Eigen::Isometry3d::Identity(), cam, kAlphas), ConfigError);
  EXPECT_THROW(smooth_frame(cur, nullptr, Eigen::Isometry3d::Identity(), cam, std::vector<double>{0.0, 0.5, 0.5}),
               InvalidInput);
  EXPECT_THROW(smooth_frame(cur, nullptr, Eigen::Isometry3d::Identity(), cam, std::vector<double>{1.5, 0.5, 0.5}),
               InvalidInput);
  EXPECT_THROW(smooth_frame(cur, nullptr, Eigen::Isometry3d::Identity(), cam, std::vector<double>{0.5, 0.5}),
               ConfigError);
}

TEST(SmoothingWeights, FollowDynamicFlags) {
  const auto labels = LabelSet::defaults();
  const auto w = smoothing_weights(labels);
  EXPECT_EQ(w[labels.require("person")], kDefaultAlphaDynamic);
  EXPECT_EQ(w[labels.require("road")], kDefaultAlphaStatic);
}

TEST(SegmentationFrame, FromScoresAndValidation) {
  ClassGrid scores(1, 2, 3);
  scores.data = {2.f, 1.f, 0.f, 0.f, 0.f, 0.f};
  const auto f = SegmentationFrame::from_scores(scores, 0.5);
  EXPECT_NEAR(f.probabilities.at(0, 0)[0], 0.66524095577482188953, 1e-7);
  EXPECT_NO_THROW(f.validate());
  EXPECT_EQ(argmax_labels(f), (std::vector<std::uint8_t>{0, 0}));
  SegmentationFrame bad = f;
  bad.probabilities.data[0] = 0.9f;
  EXPECT_THROW(bad.validate(), InvalidInput);
}

}  // namespace
}  // namespace semfuse
