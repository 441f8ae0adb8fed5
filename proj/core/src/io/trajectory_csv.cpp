#include "semfuse/io/trajectory_csv.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>

#include "semfuse/core/errors.hpp"
#include "semfuse/io/binary.hpp"

namespace semfuse::io {

namespace {

constexpr const char* kHeader = "t,tx,ty,tz,qw,qx,qy,qz";

std::string strip(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

}  // namespace

Trajectory load_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  const std::string file = path.string();
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(file, 1, "empty trajectory file");
  ++line_no;
  std::string header = strip(line);
  header.erase(std::remove(header.begin(), header.end(), ' '), header.end());
  if (header != kHeader) throw ParseError(file, 1, std::string("expected header '") + kHeader + "'");

  std::vector<Pose> poses;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip(line);
    if (line.empty()) continue;
    std::array<double, 8> v{};
    std::stringstream ss(line);
    std::string cell;
    std::size_t k = 0;
    while (std::getline(ss, cell, ',')) {
      if (k >= v.size()) throw ParseError(file, line_no, "more than 8 columns");
      cell = strip(cell);
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v[k]);
      if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw ParseError(file, line_no, "column " + std::to_string(k + 1) + " is not a number: '" + cell + "'");
      ++k;
    }
    if (k != v.size()) throw ParseError(file, line_no, "expected 8 columns, got " + std::to_string(k));
    Pose p;
    p.t = v[0];
    p.translation = {v[1], v[2], v[3]};
    p.rotation = Eigen::Quaterniond(v[4], v[5], v[6], v[7]);
    poses.push_back(p);
  }
  try {
    return Trajectory(std::move(poses));
  } catch (const Error& e) {
    throw ParseError(file, line_no, e.what());
  }
}

void save_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory) {
  auto out = open_for_write(path);
  out << kHeader << '\n' << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const Pose& p : trajectory.poses()) {
    out << p.t << ',' << p.translation.x() << ',' << p.translation.y() << ',' << p.translation.z() << ','
        << p.rotation.w() << ',' << p.rotation.x() << ',' << p.rotation.y() << ',' << p.rotation.z() << '\n';
  }
}

}  // namespace semfuse::io
