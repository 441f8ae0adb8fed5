#include "semfuse/io/frame_file.hpp"

#include <string>

#include "semfuse/core/errors.hpp"
#include "semfuse/io/binary.hpp"

namespace semfuse::io {

namespace {
constexpr const char* kFormat = "semfuse.frame";
}

void save_frame(const std::filesystem::path& path, const SegmentationFrame& frame, const LabelSet& labels) {
  if (static_cast<std::size_t>(frame.num_classes()) != labels.size())
    throw ConfigError("frame class count does not match the label set");
  auto out = open_for_write(path);
  write_header(out, {{"format", kFormat},
                     {"version", 1},
                     {"label_set_hash", labels.hash()},
                     {"height", frame.height()},
                     {"width", frame.width()},
                     {"num_classes", frame.num_classes()},
                     {"timestamp", frame.timestamp},
                     {"camera", frame.camera},
                     {"has_depth", frame.has_depth()}});
  write_values<float>(out, frame.probabilities.data);
  if (frame.has_depth()) write_values<float>(out, frame.depth);
  if (!out) throw InvalidInput("failed writing " + path.string());
}

SegmentationFrame load_frame(const std::filesystem::path& path, const LabelSet& labels) {
  auto in = open_for_read(path);
  const auto header = read_header(in, path);
  if (header_field<std::string>(header, "format", path) != kFormat)
    throw ParseError(path.string(), 1, "not a segmentation frame file");
  require_label_hash(labels, header_field<std::string>(header, "label_set_hash", path), path.string());
  const int h = header_field<int>(header, "height", path);
  const int w = header_field<int>(header, "width", path);
  const int C = header_field<int>(header, "num_classes", path);
  if (h <= 0 || w <= 0 || C != static_cast<int>(labels.size()))
    throw ParseError(path.string(), 1, "invalid frame dimensions");

  SegmentationFrame frame;
  frame.probabilities = ClassGrid(h, w, C);
  frame.timestamp = header_field<double>(header, "timestamp", path);
  frame.camera = header_field<std::string>(header, "camera", path);
  read_values<float>(in, frame.probabilities.data, path);
  if (header_field<bool>(header, "has_depth", path)) {
    frame.depth.resize(frame.probabilities.pixel_count());
    read_values<float>(in, frame.depth, path);
  }
  try {
    frame.validate();
  } catch (const InvalidInput& e) {
    throw ParseError(path.string(), 0, e.what());
  }
  return frame;
}

}  // namespace semfuse::io
