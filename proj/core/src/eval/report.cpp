#include "semfuse/eval/report.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "semfuse/core/errors.hpp"

namespace semfuse {

std::string format_iou_table(const IouResult& result, const LabelSet& labels) {
  std::size_t name_width = 4;
  bool any = false;
  for (std::size_t c = 0; c < result.per_class.size(); ++c) {
    if (!result.per_class[c]) continue;
    any = true;
    name_width = std::max(name_width, labels[c].name.size());
  }
  if (!any) return {};

  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(name_width)) << "class" << "  " << std::right << std::setw(7)
      << "IoU %" << '\n';
  out << std::string(name_width + 9, '-') << '\n';
  out << std::fixed << std::setprecision(2);
  for (std::size_t c = 0; c < result.per_class.size(); ++c) {
    if (!result.per_class[c]) continue;
    out << std::left << std::setw(static_cast<int>(name_width)) << labels[c].name << "  " << std::right
        << std::setw(7) << *result.per_class[c] * 100.0 << '\n';
  }
  out << std::string(name_width + 9, '-') << '\n';
  out << std::left << std::setw(static_cast<int>(name_width)) << "mean" << "  " << std::right << std::setw(7)
      << result.mean * 100.0 << '\n';
  if (result.restricted_fov) out << "(restricted to camera field of view)\n";
  return out.str();
}

nlohmann::json iou_to_json(const IouResult& result, const LabelSet& labels) {
  nlohmann::json per_class = nlohmann::json::object();
  for (std::size_t c = 0; c < result.per_class.size(); ++c)
    if (result.per_class[c]) per_class[labels[c].name] = *result.per_class[c];
  return {{"per_class", per_class}, {"mean", result.mean}, {"restricted_fov", result.restricted_fov}};
}

IouResult iou_from_json(const nlohmann::json& doc, const LabelSet& labels) {
  IouResult result;
  result.per_class.resize(labels.size());
  try {
    for (const auto& [name, value] : doc.at("per_class").items()) {
      result.per_class[labels.require(name)] = value.get<double>();
      ++result.classes_in_mean;
    }
    result.mean = doc.at("mean").get<double>();
    result.restricted_fov = doc.at("restricted_fov").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("IoU report: ") + e.what());
  }
  return result;
}

}  // namespace semfuse
