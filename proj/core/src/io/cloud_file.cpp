#include "semfuse/io/cloud_file.hpp"

#include <string>
#include <vector>

#include "semfuse/core/errors.hpp"
#include "semfuse/io/binary.hpp"

namespace semfuse::io {

namespace {
constexpr const char* kFormat = "semfuse.cloud";
}

void save_cloud(const std::filesystem::path& path, const SemanticCloud& cloud, const LabelSet& labels) {
  if (cloud.num_classes() != labels.size()) throw ConfigError("cloud class count does not match the label set");
  auto out = open_for_write(path);
  write_header(out, {{"format", kFormat},
                     {"version", 1},
                     {"label_set_hash", labels.hash()},
                     {"num_classes", cloud.num_classes()},
                     {"count", cloud.size()},
                     {"frame_id", cloud.frame_id},
                     {"timestamp", cloud.timestamp}});
  const std::size_t C = cloud.num_classes();
  std::vector<float> record(4 + C);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud.point(i);
    record[0] = p.x();
    record[1] = p.y();
    record[2] = p.z();
    record[3] = cloud.intensity(i);
    const auto d = cloud.distribution(i);
    for (std::size_t k = 0; k < C; ++k) record[4 + k] = static_cast<float>(d[k]);
    write_values<float>(out, record);
  }
  if (!out) throw InvalidInput("failed writing " + path.string());
}

SemanticCloud load_cloud(const std::filesystem::path& path, const LabelSet& labels) {
  auto in = open_for_read(path);
  const auto header = read_header(in, path);
  if (header_field<std::string>(header, "format", path) != kFormat)
    throw ParseError(path.string(), 1, "not a semantic cloud file");
  require_label_hash(labels, header_field<std::string>(header, "label_set_hash", path), path.string());
  const auto C = header_field<std::size_t>(header, "num_classes", path);
  const auto n = header_field<std::size_t>(header, "count", path);
  if (C != labels.size()) throw ConfigError(path.string() + ": class count does not match the label set");

  SemanticCloud cloud(C, header_field<std::string>(header, "frame_id", path),
                      header_field<double>(header, "timestamp", path));
  cloud.reserve(n);
  std::vector<float> record(4 + C);
  std::vector<double> p(C);
  for (std::size_t i = 0; i < n; ++i) {
    read_values<float>(in, record, path);
    double sum = 0.0;
    for (std::size_t k = 0; k < C; ++k) {
      p[k] = record[4 + k];
      if (!(p[k] >= 0.0)) throw ParseError(path.string(), 0, "point " + std::to_string(i) + " has a negative probability");
      sum += p[k];
    }
    if (!(sum > 0.0)) throw ParseError(path.string(), 0, "point " + std::to_string(i) + " has an all-zero distribution");
    for (double& v : p) v /= sum;
    cloud.push_back({record[0], record[1], record[2]}, record[3], p);
  }
  return cloud;
}

}  // namespace semfuse::io
