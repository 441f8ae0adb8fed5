#include "semfuse/io/calibration.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "semfuse/core/errors.hpp"
#include "semfuse/io/binary.hpp"

namespace semfuse::io {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

template <typename T>
T require(const nlohmann::json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(where + ": missing field '" + key + "'");
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + ": field '" + key + "' has the wrong type");
  }
}

CameraModel camera_from_json(const nlohmann::json& j, const std::string& name, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": camera block must be an object");
  if (const auto it = j.find("distortion"); it != j.end() && !it->is_null()) {
    for (const auto& v : *it) {
      if (v.get<double>() != 0.0)
        throw ConfigError(where + ": camera '" + name +
                          "' declares non-zero lens distortion; rectify the images first, only pinhole is supported");
    }
  }
  CameraModel cam;
  cam.name = name;
  cam.fx = require<double>(j, "fx", where);
  cam.fy = require<double>(j, "fy", where);
  cam.cx = require<double>(j, "cx", where);
  cam.cy = require<double>(j, "cy", where);
  cam.width = require<int>(j, "width", where);
  cam.height = require<int>(j, "height", where);
  cam.T_cam_base = isometry_from_row_major(require<std::vector<double>>(j, "T_cam_base", where));
  cam.validate();
  return cam;
}

nlohmann::json camera_to_json(const CameraModel& cam) {
  return {{"fx", cam.fx},         {"fy", cam.fy},         {"cx", cam.cx},
          {"cy", cam.cy},         {"width", cam.width},   {"height", cam.height},
          {"T_cam_base", isometry_to_row_major(cam.T_cam_base)}};
}

}  // namespace

Eigen::Isometry3d isometry_from_row_major(const std::vector<double>& m) {
  if (m.size() != 16) throw ConfigError("transform needs 16 values, got " + std::to_string(m.size()));
  Eigen::Matrix4d M;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) M(r, c) = m[static_cast<std::size_t>(r * 4 + c)];
  if (!M.allFinite()) throw ConfigError("transform has non-finite entries");
  if ((M.row(3) - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > 1e-9)
    throw ConfigError("transform last row must be 0 0 0 1");
  const Eigen::Matrix3d R = M.topLeftCorner<3, 3>();
  if ((R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-6 || R.determinant() < 0.0)
    throw ConfigError("transform rotation block is not a proper rotation");
  Eigen::Isometry3d T = Eigen::Isometry3d::Identity();
  T.linear() = R;
  T.translation() = M.topRightCorner<3, 1>();
  return T;
}

std::vector<double> isometry_to_row_major(const Eigen::Isometry3d& T) {
  std::vector<double> m(16);
  const Eigen::Matrix4d M = T.matrix();
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) m[static_cast<std::size_t>(r * 4 + c)] = M(r, c);
  return m;
}

const CameraModel* Calibration::find_camera(std::string_view name) const {
  for (const auto& cam : cameras)
    if (cam.name == name) return &cam;
  return nullptr;
}

const CameraModel& Calibration::camera(std::string_view name) const {
  if (const auto* cam = find_camera(name)) return *cam;
  throw ConfigError("calibration has no camera named '" + std::string(name) + "'");
}

Calibration calibration_from_json(const nlohmann::json& doc, const std::filesystem::path& source) {
  const std::string where = source.string();
  if (!doc.is_object()) throw ConfigError(where + ": calibration must be a JSON object");
  Calibration calib;
  if (!doc.contains("camera")) throw ConfigError(where + ": missing 'camera' block");
  calib.cameras.push_back(camera_from_json(doc.at("camera"), "rgb", where));
  if (doc.contains("thermal")) calib.cameras.push_back(camera_from_json(doc.at("thermal"), "thermal", where));

  if (!doc.contains("lidar")) throw ConfigError(where + ": missing 'lidar' block");
  const auto& l = doc.at("lidar");
  calib.T_base_lidar = isometry_from_row_major(require<std::vector<double>>(l, "T_base_lidar", where));
  calib.lidar.width = require<int>(l, "w", where);
  calib.lidar.height = require<int>(l, "h", where);
  calib.lidar.fov_up = require<double>(l, "f_up_deg", where) * kDeg;
  calib.lidar.fov_down = require<double>(l, "f_down_deg", where) * kDeg;
  calib.lidar.max_range = require<double>(l, "r_max_m", where);
  calib.lidar.validate();
  return calib;
}

nlohmann::json calibration_to_json(const Calibration& calib) {
  nlohmann::json doc;
  for (const auto& cam : calib.cameras) doc[cam.name == "rgb" ? "camera" : cam.name] = camera_to_json(cam);
  doc["lidar"] = {{"T_base_lidar", isometry_to_row_major(calib.T_base_lidar)},
                  {"w", calib.lidar.width},
                  {"h", calib.lidar.height},
                  {"f_up_deg", calib.lidar.fov_up / kDeg},
                  {"f_down_deg", calib.lidar.fov_down / kDeg},
                  {"r_max_m", calib.lidar.max_range}};
  return doc;
}

Calibration load_calibration(const std::filesystem::path& path) {
  return calibration_from_json(read_json_file(path), path);
}

void save_calibration(const std::filesystem::path& path, const Calibration& calib) {
  write_json_file(path, calibration_to_json(calib));
}

}  // namespace semfuse::io
