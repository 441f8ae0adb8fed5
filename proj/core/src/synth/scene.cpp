#include "semfuse/synth/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "semfuse/core/errors.hpp"
#include "semfuse/io/binary.hpp"
#include "semfuse/io/calibration.hpp"

namespace semfuse::synth {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kMinHit = 1e-6;

Eigen::Vector3d vec3(const nlohmann::json& j, const char* key, const Eigen::Vector3d& fallback) {
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  const auto v = it->get<std::vector<double>>();
  if (v.size() != 3) throw ConfigError(std::string("scene field '") + key + "' needs 3 values");
  return {v[0], v[1], v[2]};
}

std::vector<double> to_vec(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

double temperature_from_json(const nlohmann::json& j, double fallback) {
  const auto it = j.find("temperature");
  if (it == j.end()) return fallback;
  if (it->is_string() && it->get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
  return it->get<double>();
}

nlohmann::json temperature_to_json(double t) {
  if (std::isinf(t)) return "inf";
  return t;
}

LabelNoise label_noise_from_json(const nlohmann::json& j, const LabelNoise& fallback) {
  return {j.value("flip_rate", fallback.flip_rate), temperature_from_json(j, fallback.temperature)};
}

const char* shape_name(Shape s) {
  switch (s) {
    case Shape::plane:
      return "plane";
    case Shape::box:
      return "box";
    case Shape::cylinder:
      return "cylinder";
  }
  return "?";
}

std::optional<double> intersect_plane(const Primitive& p, const Eigen::Vector3d& anchor, const Eigen::Vector3d& o,
                                      const Eigen::Vector3d& d) {
  const double denom = p.normal.dot(d);
  if (std::abs(denom) < 1e-12) return std::nullopt;
  const double s = p.normal.dot(anchor - o) / denom;
  if (s <= kMinHit) return std::nullopt;
  return s;
}

std::optional<double> intersect_box(const Primitive& p, const Eigen::Vector3d& center, const Eigen::Vector3d& o,
                                    const Eigen::Vector3d& d) {
  const Eigen::Matrix3d R_inv = Eigen::AngleAxisd(-p.yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  const Eigen::Vector3d lo = R_inv * (o - center);
  const Eigen::Vector3d ld = R_inv * d;
  const Eigen::Vector3d half = 0.5 * p.size;
  double t_enter = -std::numeric_limits<double>::infinity();
  double t_exit = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (std::abs(ld[a]) < 1e-15) {
      if (lo[a] < -half[a] || lo[a] > half[a]) return std::nullopt;
      continue;
    }
    double t0 = (-half[a] - lo[a]) / ld[a];
    double t1 = (half[a] - lo[a]) / ld[a];
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
  }
  if (t_exit < t_enter || t_enter <= kMinHit) return std::nullopt;
  return t_enter;
}

std::optional<double> intersect_cylinder(const Primitive& p, const Eigen::Vector3d& base, const Eigen::Vector3d& o,
                                         const Eigen::Vector3d& d) {
  const Eigen::Vector3d lo = o - base;
  std::optional<double> best;
  auto consider = [&](double t) {
    if (t > kMinHit && (!best || t < *best)) best = t;
  };
  const double a = d.x() * d.x() + d.y() * d.y();
  if (a > 1e-15) {
    const double b = 2.0 * (lo.x() * d.x() + lo.y() * d.y());
    const double c = lo.x() * lo.x() + lo.y() * lo.y() - p.radius * p.radius;
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      for (double t : {(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)}) {
        const double z = lo.z() + t * d.z();
        if (z >= 0.0 && z <= p.height) consider(t);
      }
    }
  }
  if (std::abs(d.z()) > 1e-15) {
    for (double cap : {0.0, p.height}) {
      const double t = (cap - lo.z()) / d.z();
      const double x = lo.x() + t * d.x();
      const double y = lo.y() + t * d.y();
      if (x * x + y * y <= p.radius * p.radius) consider(t);
    }
  }
  return best;
}

}  // namespace

std::size_t TrajectorySpec::frame_count() const {
  return static_cast<std::size_t>(std::floor(duration * rate_hz + 1e-9)) + 1;
}

Pose TrajectorySpec::pose_at(double t) const {
  Pose p;
  p.t = t;
  p.translation = start + velocity * t;
  p.rotation = Eigen::Quaterniond(Eigen::AngleAxisd(yaw + yaw_rate * t, Eigen::Vector3d::UnitZ()));
  return p;
}

Trajectory TrajectorySpec::sample(double step) const {
  std::vector<Pose> poses;
  const double end = std::max(duration, frame_time(frame_count() - 1));
  const auto n = static_cast<std::size_t>(std::ceil(end / step - 1e-9));
  for (std::size_t i = 0; i <= n; ++i) poses.push_back(pose_at(std::min(end, static_cast<double>(i) * step)));
  if (poses.size() > 1 && poses.back().t <= poses[poses.size() - 2].t) poses.pop_back();
  return Trajectory(std::move(poses));
}

LabelNoise LabelNoise::calibrated(double flip_rate, std::size_t num_classes) {
  if (!(flip_rate >= 0.0 && flip_rate < 1.0) || num_classes < 2)
    throw ConfigError("calibrated noise needs a flip rate in [0,1) and at least two classes");
  if (flip_rate == 0.0) return {0.0, std::numeric_limits<double>::infinity()};
  // e^T / (e^T + C - 1) = 1 - flip_rate
  return {flip_rate, std::log((1.0 - flip_rate) * static_cast<double>(num_classes - 1) / flip_rate)};
}

void NoiseSpec::validate() const {
  auto rate = [](double r, const char* what) {
    if (!(r >= 0.0 && r <= 1.0)) throw ConfigError(std::string(what) + " must lie in [0,1]");
  };
  rate(lidar.flip_rate, "lidar flip rate");
  rate(camera.flip_rate, "camera flip rate");
  rate(miss_rate, "detection miss rate");
  rate(false_rate, "detection false rate");
  if (!(lidar.temperature >= 0.0) || !(camera.temperature >= 0.0))
    throw ConfigError("score temperature must be non-negative");
  if (!(range_sigma >= 0.0)) throw ConfigError("range sigma must be non-negative");
  if (!(score_min > 0.0 && score_min <= score_max && score_max <= 1.0))
    throw ConfigError("detection scores need 0 < score_min <= score_max <= 1");
}

void SceneSpec::validate(const LabelSet& labels) const {
  for (const auto& p : primitives) {
    if (p.class_index >= labels.size()) throw ConfigError("primitive class index out of range");
    if (p.shape == Shape::box && (p.size.array() <= 0.0).any()) throw ConfigError("box sizes must be positive");
    if (p.shape == Shape::cylinder && (!(p.radius > 0.0) || !(p.height > 0.0)))
      throw ConfigError("cylinder radius and height must be positive");
    if (p.shape == Shape::plane && std::abs(p.normal.norm() - 1.0) > 1e-9)
      throw ConfigError("plane normal must have unit length");
  }
  if (!(trajectory.rate_hz > 0.0) || !(trajectory.duration >= 0.0))
    throw ConfigError("trajectory needs a positive rate and non-negative duration");
  lidar.validate();
  camera.validate();
  noise.validate();
}

Eigen::Isometry3d forward_camera_extrinsic(const Eigen::Vector3d& camera_in_base) {
  Eigen::Matrix3d R_cam_base;
  R_cam_base << 0, -1, 0,  //
      0, 0, -1,            //
      1, 0, 0;
  Eigen::Isometry3d T = Eigen::Isometry3d::Identity();
  T.linear() = R_cam_base;
  T.translation() = -R_cam_base * camera_in_base;
  return T;
}

SceneSpec scene_from_json(const nlohmann::json& doc, const LabelSet& labels) {
  SceneSpec scene;
  try {
    scene.name = doc.value("name", std::string("scene"));

    if (const auto it = doc.find("lidar"); it != doc.end()) {
      const auto& l = *it;
      scene.lidar.width = l.value("w", scene.lidar.width);
      scene.lidar.height = l.value("h", scene.lidar.height);
      scene.lidar.fov_up = l.value("f_up_deg", scene.lidar.fov_up / kDeg) * kDeg;
      scene.lidar.fov_down = l.value("f_down_deg", scene.lidar.fov_down / kDeg) * kDeg;
      scene.lidar.max_range = l.value("r_max_m", scene.lidar.max_range);
      if (l.contains("T_base_lidar"))
        scene.T_base_lidar = io::isometry_from_row_major(l.at("T_base_lidar").get<std::vector<double>>());
    }

    const auto& c = doc.at("camera");
    scene.camera.fx = c.at("fx").get<double>();
    scene.camera.fy = c.at("fy").get<double>();
    scene.camera.cx = c.at("cx").get<double>();
    scene.camera.cy = c.at("cy").get<double>();
    scene.camera.width = c.at("width").get<int>();
    scene.camera.height = c.at("height").get<int>();
    if (c.contains("T_cam_base"))
      scene.camera.T_cam_base = io::isometry_from_row_major(c.at("T_cam_base").get<std::vector<double>>());
    else
      scene.camera.T_cam_base = forward_camera_extrinsic(vec3(c, "position_in_base", Eigen::Vector3d::Zero()));

    if (const auto it = doc.find("trajectory"); it != doc.end()) {
      const auto& t = *it;
      auto& tr = scene.trajectory;
      tr.start = vec3(t, "start", tr.start);
      tr.yaw = t.value("yaw_deg", 0.0) * kDeg;
      tr.velocity = vec3(t, "velocity", tr.velocity);
      tr.yaw_rate = t.value("yaw_rate_deg", 0.0) * kDeg;
      tr.duration = t.value("duration", tr.duration);
      tr.rate_hz = t.value("rate_hz", tr.rate_hz);
    }

    if (const auto it = doc.find("noise"); it != doc.end()) {
      const auto& n = *it;
      auto& ns = scene.noise;
      ns.seed = n.value("seed", ns.seed);
      if (n.contains("lidar")) ns.lidar = label_noise_from_json(n.at("lidar"), ns.lidar);
      if (n.contains("camera")) ns.camera = label_noise_from_json(n.at("camera"), ns.camera);
      ns.range_sigma = n.value("range_sigma", ns.range_sigma);
      if (n.contains("detection")) {
        const auto& d = n.at("detection");
        ns.miss_rate = d.value("miss_rate", ns.miss_rate);
        ns.false_rate = d.value("false_rate", ns.false_rate);
        ns.score_min = d.value("score_min", ns.score_min);
        ns.score_max = d.value("score_max", ns.score_max);
      }
    }

    for (const auto& pj : doc.at("primitives")) {
      Primitive p;
      const auto shape = pj.at("shape").get<std::string>();
      p.class_index = labels.require(pj.at("class").get<std::string>());
      p.velocity = vec3(pj, "velocity", Eigen::Vector3d::Zero());
      if (shape == "plane") {
        p.shape = Shape::plane;
        p.anchor = vec3(pj, "point", Eigen::Vector3d::Zero());
        p.normal = vec3(pj, "normal", Eigen::Vector3d::UnitZ()).normalized();
      } else if (shape == "box") {
        p.shape = Shape::box;
        p.anchor = vec3(pj, "center", Eigen::Vector3d::Zero());
        p.size = vec3(pj, "size", Eigen::Vector3d::Ones());
        p.yaw = pj.value("yaw_deg", 0.0) * kDeg;
      } else if (shape == "cylinder") {
        p.shape = Shape::cylinder;
        p.anchor = vec3(pj, "base", Eigen::Vector3d::Zero());
        p.radius = pj.at("radius").get<double>();
        p.height = pj.at("height").get<double>();
      } else {
        throw ConfigError("unknown primitive shape '" + shape + "'");
      }
      scene.primitives.push_back(p);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scene description: ") + e.what());
  }
  scene.validate(labels);
  return scene;
}

nlohmann::json scene_to_json(const SceneSpec& scene, const LabelSet& labels) {
  nlohmann::json prims = nlohmann::json::array();
  for (const auto& p : scene.primitives) {
    nlohmann::json j = {{"shape", shape_name(p.shape)}, {"class", labels[p.class_index].name}};
    switch (p.shape) {
      case Shape::plane:
        j["point"] = to_vec(p.anchor);
        j["normal"] = to_vec(p.normal);
        break;
      case Shape::box:
        j["center"] = to_vec(p.anchor);
        j["size"] = to_vec(p.size);
        j["yaw_deg"] = p.yaw / kDeg;
        break;
      case Shape::cylinder:
        j["base"] = to_vec(p.anchor);
        j["radius"] = p.radius;
        j["height"] = p.height;
        break;
    }
    if (!p.velocity.isZero()) j["velocity"] = to_vec(p.velocity);
    prims.push_back(j);
  }
  const auto& tr = scene.trajectory;
  const auto& ns = scene.noise;
  return {{"name", scene.name},
          {"lidar",
           {{"w", scene.lidar.width},
            {"h", scene.lidar.height},
            {"f_up_deg", scene.lidar.fov_up / kDeg},
            {"f_down_deg", scene.lidar.fov_down / kDeg},
            {"r_max_m", scene.lidar.max_range},
            {"T_base_lidar", io::isometry_to_row_major(scene.T_base_lidar)}}},
          {"camera",
           {{"fx", scene.camera.fx},
            {"fy", scene.camera.fy},
            {"cx", scene.camera.cx},
            {"cy", scene.camera.cy},
            {"width", scene.camera.width},
            {"height", scene.camera.height},
            {"T_cam_base", io::isometry_to_row_major(scene.camera.T_cam_base)}}},
          {"trajectory",
           {{"start", to_vec(tr.start)},
            {"yaw_deg", tr.yaw / kDeg},
            {"velocity", to_vec(tr.velocity)},
            {"yaw_rate_deg", tr.yaw_rate / kDeg},
            {"duration", tr.duration},
            {"rate_hz", tr.rate_hz}}},
          {"noise",
           {{"seed", ns.seed},
            {"lidar", {{"flip_rate", ns.lidar.flip_rate}, {"temperature", temperature_to_json(ns.lidar.temperature)}}},
            {"camera",
             {{"flip_rate", ns.camera.flip_rate}, {"temperature", temperature_to_json(ns.camera.temperature)}}},
            {"range_sigma", ns.range_sigma},
            {"detection",
             {{"miss_rate", ns.miss_rate},
              {"false_rate", ns.false_rate},
              {"score_min", ns.score_min},
              {"score_max", ns.score_max}}}}},
          {"primitives", prims}};
}

SceneSpec load_scene(const std::filesystem::path& path, const LabelSet& labels) {
  try {
    return scene_from_json(io::read_json_file(path), labels);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::optional<RayHit> cast_ray(const SceneSpec& scene, const Eigen::Vector3d& origin, const Eigen::Vector3d& direction,
                               double t, double max_distance) {
  std::optional<RayHit> best;
  for (std::size_t i = 0; i < scene.primitives.size(); ++i) {
    const Primitive& p = scene.primitives[i];
    const Eigen::Vector3d anchor = p.anchor_at(t);
    std::optional<double> s;
    switch (p.shape) {
      case Shape::plane:
        s = intersect_plane(p, anchor, origin, direction);
        break;
      case Shape::box:
        s = intersect_box(p, anchor, origin, direction);
        break;
      case Shape::cylinder:
        s = intersect_cylinder(p, anchor, origin, direction);
        break;
    }
    if (s && *s <= max_distance && (!best || *s < best->distance)) best = RayHit{*s, i};
  }
  return best;
}

}  // namespace semfuse::synth
