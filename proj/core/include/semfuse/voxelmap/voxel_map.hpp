#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "semfuse/core/probability.hpp"
#include "semfuse/core/semantic_cloud.hpp"

namespace semfuse {

struct VoxelKey {
  std::int32_t ix = 0;
  std::int32_t iy = 0;
  std::int32_t iz = 0;

  auto operator<=>(const VoxelKey&) const = default;
};

/// floor(p / voxel_size) per axis.
VoxelKey voxel_key(const Eigen::Vector3d& p, double voxel_size);

/// Lower corner of the voxel cube.
Eigen::Vector3d voxel_origin(const VoxelKey& key, double voxel_size);

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const noexcept {
    const auto h = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.ix)) * 73856093ULL) ^
                   (static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.iy)) * 19349663ULL) ^
                   (static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.iz)) * 83492791ULL);
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

/// What happens to the oldest per-scan state when the horizon deque overflows.
enum class HorizonPolicy {
  /// The entry is discarded. The infinite-horizon state is updated on arrival.
  drop,
  /// The entry is folded into the infinite-horizon state on eviction.
  fuse_to_infinite,
};

/// How the points of one scan falling in the same voxel are combined.
enum class ScanMerge {
  product,  ///< sum of log-probabilities, renormalized
  average,  ///< arithmetic mean of the probability vectors
};

enum class Horizon { infinite, finite };

struct VoxelMapConfig {
  double voxel_size = 0.25;
  std::size_t horizon_length = 10;
  HorizonPolicy policy = HorizonPolicy::drop;
  ScanMerge scan_merge = ScanMerge::product;
  /// Least recently touched voxels are evicted above this count. 0 disables it.
  std::size_t max_voxels = 0;

  /// Throws ConfigError for a non-positive voxel size or a zero horizon.
  void validate() const;
};

struct HorizonEntry {
  std::int64_t scan_id = 0;
  std::vector<double> log_state;  ///< normalized log-probabilities
};

struct VoxelState {
  /// Normalized log-probabilities. Under `drop` this covers every scan, under
  /// `fuse_to_infinite` only the scans already evicted from `horizon`.
  std::vector<double> log_inf;
  Eigen::Vector3d mean_pos = Eigen::Vector3d::Zero();
  std::uint32_t n_points = 0;
  std::deque<HorizonEntry> horizon;
  std::int64_t last_scan = 0;
};

struct VoxelQuery {
  ClassDistribution distribution;
  Eigen::Vector3d mean_pos = Eigen::Vector3d::Zero();
  std::uint32_t n_points = 0;
};

/// Sparse voxel hash holding a log-space categorical filter per voxel.
///
/// Not internally synchronized: concurrent const access is safe, mutation needs
/// exclusive access.
class VoxelMap {
 public:
  explicit VoxelMap(std::size_t num_classes, VoxelMapConfig config = {});

  /// Integrates a world-frame cloud. Every scan_id must exceed the previous one
  /// (ContractViolation otherwise).
  void integrate_scan(const SemanticCloud& cloud, std::int64_t scan_id);

  std::optional<VoxelQuery> query(const VoxelKey& key, Horizon horizon = Horizon::infinite) const;

  /// Writes the queried distribution of `state` into `out` (size C).
  void distribution_into(const VoxelState& state, Horizon horizon, std::span<double> out) const;

  /// One point per voxel at its mean position, in lexicographic key order.
  SemanticCloud export_cloud(Horizon horizon = Horizon::infinite) const;

  const VoxelState* find(const VoxelKey& key) const;
  std::vector<VoxelKey> sorted_keys() const;

  /// Inserts a voxel verbatim (used when restoring snapshots). Throws
  /// InvalidInput when the state has the wrong class count.
  void restore(const VoxelKey& key, VoxelState state);

  std::size_t size() const noexcept { return table_.size(); }
  bool empty() const noexcept { return table_.empty(); }
  std::size_t num_classes() const noexcept { return num_classes_; }
  const VoxelMapConfig& config() const noexcept { return config_; }
  std::optional<std::int64_t> last_scan_id() const noexcept { return last_scan_id_; }

  using Table = std::unordered_map<VoxelKey, VoxelState, VoxelKeyHash>;
  const Table& table() const noexcept { return table_; }

 private:
  void push_scan_state(VoxelState& state, std::int64_t scan_id, std::vector<double> log_state);
  void evict_least_recent();

  std::size_t num_classes_;
  VoxelMapConfig config_;
  Table table_;
  std::optional<std::int64_t> last_scan_id_;
};

}  // namespace semfuse
