#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace semfuse {

/// Ordered set of semantic classes. The order defines the class index used in every
/// probability vector, so it is serialized (as a hash) with every artifact.
class LabelSet {
 public:
  struct ClassInfo {
    std::string name;
    bool dynamic = false;
    bool unknown = false;
  };

  /// Validates: C >= 2, unique names, at most one unknown class.
  explicit LabelSet(std::vector<ClassInfo> classes);

  /// person, bicycle, vehicle, building, road, sidewalk, vegetation, barrier/fence,
  /// pole, traffic sign, water, sky, terrain, object, unknown.
  static LabelSet defaults();

  static LabelSet from_json(const nlohmann::json& doc);
  static LabelSet load(const std::string& path);
  nlohmann::json to_json() const;
  void save(const std::string& path) const;

  std::size_t size() const noexcept { return classes_.size(); }
  const ClassInfo& operator[](std::size_t i) const { return classes_.at(i); }
  const std::vector<ClassInfo>& classes() const noexcept { return classes_; }

  std::optional<std::size_t> index_of(std::string_view name) const;
  /// Like index_of but throws ConfigError naming the missing class.
  std::size_t require(std::string_view name) const;
  std::optional<std::size_t> unknown_index() const;
  bool is_dynamic(std::size_t i) const { return classes_.at(i).dynamic; }
  std::vector<bool> dynamic_mask() const;

  /// 16 hex digits; FNV-1a 64 over the canonical JSON serialization.
  const std::string& hash() const noexcept { return hash_; }

  bool operator==(const LabelSet& other) const { return hash_ == other.hash_; }

 private:
  std::vector<ClassInfo> classes_;
  std::string hash_;
};

/// Throws ConfigError when an artifact was produced under a different label set.
void require_label_hash(const LabelSet& labels, std::string_view found, std::string_view what);

}  // namespace semfuse
