#pragma once

#include <filesystem>

#include "semfuse/geometry/pose.hpp"

namespace semfuse::io {

/// Reads `t,tx,ty,tz,qw,qx,qy,qz` rows after a header line. Throws ParseError
/// with the offending line number.
Trajectory load_trajectory_csv(const std::filesystem::path& path);
void save_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory);

}  // namespace semfuse::io
