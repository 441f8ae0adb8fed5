#pragma once

#include <vector>

#include <Eigen/Geometry>

namespace semfuse {

/// Stamped rigid transform of a body frame into the world frame.
struct Pose {
  double t = 0.0;
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();

  Eigen::Isometry3d isometry() const;
  static Pose from_isometry(double t, const Eigen::Isometry3d& T);
};

/// Time-ordered stamped poses of the vehicle base frame. Queries between knots
/// use linear interpolation for translation and slerp for rotation; queries up
/// to kExtrapolationLimit seconds beyond either end extrapolate at constant
/// velocity.
class Trajectory {
 public:
  static constexpr double kExtrapolationLimit = 0.1;

  /// Throws InvalidInput on an empty list, non-increasing timestamps or a
  /// quaternion whose norm is off by more than 1e-9 (after which it is renormalized).
  explicit Trajectory(std::vector<Pose> poses);

  /// Throws OutOfRange naming `t` when it lies beyond the extrapolation limit.
  Pose interpolate(double t) const;

  double start_time() const { return poses_.front().t; }
  double end_time() const { return poses_.back().t; }
  const std::vector<Pose>& poses() const noexcept { return poses_; }

 private:
  std::vector<Pose> poses_;
};

inline Pose interpolate_pose(const Trajectory& trajectory, double t) { return trajectory.interpolate(t); }

/// Motion-compensated LiDAR->camera transform
///   T = T_cam_base * T_base(t_cam)^-1 * T_base(t_lidar) * T_base_lidar.
/// With t_cam == t_lidar the middle factor is skipped entirely, so the result is
/// exactly T_cam_base * T_base_lidar.
Eigen::Isometry3d lidar_to_camera_transform(double t_lidar, double t_cam, const Trajectory& trajectory,
                                            const Eigen::Isometry3d& T_cam_base,
                                            const Eigen::Isometry3d& T_base_lidar);

/// Relative transform taking points of a camera at t_from into the camera at t_to.
Eigen::Isometry3d camera_motion(double t_from, double t_to, const Trajectory& trajectory,
                                const Eigen::Isometry3d& T_cam_base);

}  // namespace semfuse
