#include "semfuse/io/detections_jsonl.hpp"

#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "semfuse/core/errors.hpp"
#include "semfuse/io/binary.hpp"

namespace semfuse::io {

std::vector<Detection> load_detections(const std::filesystem::path& path, const LabelSet& labels) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::vector<Detection> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Detection d;
      d.t = j.at("t").get<double>();
      d.source = detection_source_from_string(j.at("source").get<std::string>());
      const auto name = j.at("class").get<std::string>();
      const auto idx = labels.index_of(name);
      if (!idx) throw ParseError(path.string(), line_no, "unknown class '" + name + "'");
      d.class_index = *idx;
      d.score = j.at("score").get<double>();
      const auto box = j.at("bbox").get<std::vector<double>>();
      if (box.size() != 4) throw ParseError(path.string(), line_no, "bbox needs 4 values");
      d.bbox = {box[0], box[1], box[2], box[3]};
      out.push_back(d);
    } catch (const ParseError&) {
      throw;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string(), line_no, e.what());
    } catch (const Error& e) {
      throw ParseError(path.string(), line_no, e.what());
    }
  }
  return out;
}

void save_detections(const std::filesystem::path& path, const std::vector<Detection>& detections,
                     const LabelSet& labels) {
  auto out = open_for_write(path);
  for (const Detection& d : detections) {
    const nlohmann::json j = {{"t", d.t},
                              {"source", std::string(to_string(d.source))},
                              {"class", labels[d.class_index].name},
                              {"score", d.score},
                              {"bbox", {d.bbox.x_min, d.bbox.y_min, d.bbox.x_max, d.bbox.y_max}}};
    out << j.dump() << '\n';
  }
}

}  // namespace semfuse::io
