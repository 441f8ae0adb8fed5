#include "semfuse/labelprop/training_sample.hpp"

#include <string>

#include "semfuse/core/errors.hpp"
#include "semfuse/io/binary.hpp"

namespace semfuse {

TrainingSample make_training_sample(const RangeImage& scan, const PseudoLabelImage& labels, bool include_intensity,
                                    const LabelSet& label_set) {
  if (scan.height != labels.height || scan.width != labels.width || labels.labels.size() != scan.size())
    throw ContractViolation("scan is " + std::to_string(scan.height) + "x" + std::to_string(scan.width) +
                            " but labels are " + std::to_string(labels.height) + "x" + std::to_string(labels.width));
  TrainingSample s;
  s.height = scan.height;
  s.width = scan.width;
  s.channels = include_intensity ? 5 : 4;
  const std::size_t n = scan.size();
  s.data.resize(n * static_cast<std::size_t>(s.channels));
  s.labels.assign(n, kUnlabeled);
  for (std::size_t i = 0; i < n; ++i) {
    float* dst = s.data.data() + i * static_cast<std::size_t>(s.channels);
    dst[0] = scan.range[i];
    dst[1] = scan.x[i];
    dst[2] = scan.y[i];
    dst[3] = scan.z[i];
    if (include_intensity) dst[4] = scan.intensity[i];
    if (scan.valid(i)) s.labels[i] = labels.labels[i];
  }
  const Pose& v = labels.viewpoint;
  s.meta = {{"H", s.height},
            {"W", s.width},
            {"channels", s.channels},
            {"label_set_hash", label_set.hash()},
            {"provenance", std::string(to_string(labels.provenance))},
            {"scan_id", labels.scan_id},
            {"viewpoint",
             {{"t", v.t},
              {"translation", {v.translation.x(), v.translation.y(), v.translation.z()}},
              {"rotation_wxyz", {v.rotation.w(), v.rotation.x(), v.rotation.y(), v.rotation.z()}}}},
            {"threshold", labels.threshold}};
  return s;
}

void write_training_sample(const std::filesystem::path& dir, const TrainingSample& sample) {
  std::filesystem::create_directories(dir);
  {
    auto out = io::open_for_write(dir / "channels.bin");
    io::write_values<float>(out, sample.data);
  }
  {
    auto out = io::open_for_write(dir / "labels.bin");
    io::write_values<std::uint8_t>(out, sample.labels);
  }
  io::write_json_file(dir / "meta.json", sample.meta);
}

TrainingSample read_training_sample(const std::filesystem::path& dir) {
  TrainingSample s;
  s.meta = io::read_json_file(dir / "meta.json");
  try {
    s.height = s.meta.at("H").get<int>();
    s.width = s.meta.at("W").get<int>();
    s.channels = s.meta.at("channels").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError((dir / "meta.json").string(), 0, e.what());
  }
  const std::size_t n = static_cast<std::size_t>(s.height) * static_cast<std::size_t>(s.width);
  s.data.resize(n * static_cast<std::size_t>(s.channels));
  s.labels.resize(n);
  {
    auto in = io::open_for_read(dir / "channels.bin");
    io::read_values<float>(in, s.data, dir / "channels.bin");
  }
  {
    auto in = io::open_for_read(dir / "labels.bin");
    io::read_values<std::uint8_t>(in, s.labels, dir / "labels.bin");
  }
  return s;
}

}  // namespace semfuse
