#include "semfuse/geometry/pose.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "semfuse/core/errors.hpp"

namespace semfuse {

Eigen::Isometry3d Pose::isometry() const {
  Eigen::Isometry3d T = Eigen::Isometry3d::Identity();
  T.linear() = rotation.toRotationMatrix();
  T.translation() = translation;
  return T;
}

Pose Pose::from_isometry(double t, const Eigen::Isometry3d& T) {
  Pose p;
  p.t = t;
  p.translation = T.translation();
  p.rotation = Eigen::Quaterniond(T.linear()).normalized();
  return p;
}

Trajectory::Trajectory(std::vector<Pose> poses) : poses_(std::move(poses)) {
  if (poses_.empty()) throw InvalidInput("trajectory needs at least one pose");
  for (std::size_t i = 0; i < poses_.size(); ++i) {
    auto& p = poses_[i];
    if (std::abs(p.rotation.norm() - 1.0) > 1e-9) {
      std::ostringstream msg;
      msg << "pose " << i << " at t=" << p.t << " has a non-unit quaternion (norm " << p.rotation.norm() << ")";
      throw InvalidInput(msg.str());
    }
    p.rotation.normalize();
    if (i > 0 && !(p.t > poses_[i - 1].t)) {
      std::ostringstream msg;
      msg << "trajectory timestamps must increase strictly (t=" << p.t << " after " << poses_[i - 1].t << ")";
      throw InvalidInput(msg.str());
    }
  }
}

namespace {

Pose blend(const Pose& a, const Pose& b, double t) {
  const double s = (t - a.t) / (b.t - a.t);
  Pose out;
  out.t = t;
  out.translation = a.translation + s * (b.translation - a.translation);
  out.rotation = a.rotation.slerp(s, b.rotation).normalized();
  return out;
}

}  // namespace

Pose Trajectory::interpolate(double t) const {
  const double lo = start_time() - kExtrapolationLimit;
  const double hi = end_time() + kExtrapolationLimit;
  if (!(t >= lo && t <= hi)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "timestamp " << t << " outside trajectory [" << start_time() << ", " << end_time() << "] +/- "
        << kExtrapolationLimit << " s";
    throw OutOfRange(msg.str());
  }
  if (poses_.size() == 1) {
    Pose p = poses_.front();
    p.t = t;
    return p;
  }
  auto it = std::lower_bound(poses_.begin(), poses_.end(), t,
                             [](const Pose& p, double value) { return p.t < value; });
  if (it != poses_.end() && it->t == t) return *it;
  if (it == poses_.begin()) return blend(poses_[0], poses_[1], t);
  if (it == poses_.end()) return blend(poses_[poses_.size() - 2], poses_.back(), t);
  return blend(*(it - 1), *it, t);
}

Eigen::Isometry3d lidar_to_camera_transform(double t_lidar, double t_cam, const Trajectory& trajectory,
                                            const Eigen::Isometry3d& T_cam_base,
                                            const Eigen::Isometry3d& T_base_lidar) {
  if (t_lidar == t_cam) {
    // Still validate the timestamp against the trajectory.
    (void)trajectory.interpolate(t_lidar);
    return T_cam_base * T_base_lidar;
  }
  const Eigen::Isometry3d world_base_cam = trajectory.interpolate(t_cam).isometry();
  const Eigen::Isometry3d world_base_lidar = trajectory.interpolate(t_lidar).isometry();
  return T_cam_base * (world_base_cam.inverse() * world_base_lidar) * T_base_lidar;
}

Eigen::Isometry3d camera_motion(double t_from, double t_to, const Trajectory& trajectory,
                                const Eigen::Isometry3d& T_cam_base) {
  const Eigen::Isometry3d base_motion =
      trajectory.interpolate(t_to).isometry().inverse() * trajectory.interpolate(t_from).isometry();
  return T_cam_base * base_motion * T_cam_base.inverse();
}

}  // namespace semfuse
