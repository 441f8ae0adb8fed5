#include "semfuse/core/label_set.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>

#include "semfuse/core/errors.hpp"

namespace semfuse {

namespace {

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

LabelSet::LabelSet(std::vector<ClassInfo> classes) : classes_(std::move(classes)) {
  if (classes_.size() < 2) throw ConfigError("label set needs at least two classes");
  // Label images store class indices as uint8 with 255 reserved for "unlabeled".
  if (classes_.size() > 254) throw ConfigError("label set is limited to 254 classes");
  std::set<std::string> seen;
  int unknowns = 0;
  for (const auto& c : classes_) {
    if (c.name.empty()) throw ConfigError("label set contains an empty class name");
    if (!seen.insert(c.name).second) throw ConfigError("duplicate class name '" + c.name + "'");
    unknowns += c.unknown ? 1 : 0;
  }
  if (unknowns > 1) throw ConfigError("at most one class may be marked unknown");
  hash_ = fnv1a_hex(to_json().dump());
}

LabelSet LabelSet::defaults() {
  return LabelSet({{"person", true, false},
                   {"bicycle", true, false},
                   {"vehicle", true, false},
                   {"building", false, false},
                   {"road", false, false},
                   {"sidewalk", false, false},
                   {"vegetation", false, false},
                   {"barrier", false, false},
                   {"pole", false, false},
                   {"traffic_sign", false, false},
                   {"water", false, false},
                   {"sky", false, false},
                   {"terrain", false, false},
                   {"object", false, false},
                   {"unknown", false, true}});
}

LabelSet LabelSet::from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("classes") || !doc["classes"].is_array())
    throw ConfigError("label set document needs a \"classes\" array");
  std::vector<ClassInfo> classes;
  for (const auto& entry : doc["classes"]) {
    ClassInfo info;
    info.name = entry.at("name").get<std::string>();
    info.dynamic = entry.value("dynamic", false);
    info.unknown = entry.value("unknown", false);
    classes.push_back(std::move(info));
  }
  return LabelSet(std::move(classes));
}

LabelSet LabelSet::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open label set");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path, 0, e.what());
  }
  return from_json(doc);
}

nlohmann::json LabelSet::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : classes_)
    arr.push_back({{"name", c.name}, {"dynamic", c.dynamic}, {"unknown", c.unknown}});
  return {{"classes", arr}};
}

void LabelSet::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << to_json().dump(2) << '\n';
}

std::optional<std::size_t> LabelSet::index_of(std::string_view name) const {
  auto it = std::find_if(classes_.begin(), classes_.end(),
                         [&](const ClassInfo& c) { return c.name == name; });
  if (it == classes_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - classes_.begin());
}

std::size_t LabelSet::require(std::string_view name) const {
  if (auto idx = index_of(name)) return *idx;
  throw ConfigError("class '" + std::string(name) + "' is not in the label set");
}

std::optional<std::size_t> LabelSet::unknown_index() const {
  for (std::size_t i = 0; i < classes_.size(); ++i)
    if (classes_[i].unknown) return i;
  return std::nullopt;
}

std::vector<bool> LabelSet::dynamic_mask() const {
  std::vector<bool> mask(classes_.size());
  for (std::size_t i = 0; i < classes_.size(); ++i) mask[i] = classes_[i].dynamic;
  return mask;
}

void require_label_hash(const LabelSet& labels, std::string_view found, std::string_view what) {
  if (found != labels.hash())
    throw ConfigError(std::string(what) + " was written with label set " + std::string(found) +
                      ", expected " + labels.hash());
}

}  // namespace semfuse
