#include "semfuse/voxelmap/voxel_map.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "semfuse/core/errors.hpp"

namespace semfuse {

VoxelKey voxel_key(const Eigen::Vector3d& p, double voxel_size) {
  return {static_cast<std::int32_t>(std::floor(p.x() / voxel_size)),
          static_cast<std::int32_t>(std::floor(p.y() / voxel_size)),
          static_cast<std::int32_t>(std::floor(p.z() / voxel_size))};
}

Eigen::Vector3d voxel_origin(const VoxelKey& key, double voxel_size) {
  return Eigen::Vector3d(key.ix, key.iy, key.iz) * voxel_size;
}

void VoxelMapConfig::validate() const {
  if (!(voxel_size > 0.0) || !std::isfinite(voxel_size))
    throw ConfigError("voxel size must be positive, got " + std::to_string(voxel_size));
  if (horizon_length == 0) throw ConfigError("horizon length must be at least 1");
}

VoxelMap::VoxelMap(std::size_t num_classes, VoxelMapConfig config) : num_classes_(num_classes), config_(config) {
  if (num_classes_ < 2) throw ConfigError("a voxel map needs at least two classes");
  config_.validate();
}

namespace {

void add_into(std::span<double> acc, std::span<const double> x) {
  for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += x[k];
}

void exponentiate_into(std::span<const double> l, std::span<double> out) {
  double sum = 0.0;
  for (std::size_t k = 0; k < l.size(); ++k) {
    out[k] = std::exp(l[k]);
    sum += out[k];
  }
  for (double& v : out) v /= sum;
}

}  // namespace

void VoxelMap::push_scan_state(VoxelState& state, std::int64_t scan_id, std::vector<double> log_state) {
  if (config_.policy == HorizonPolicy::drop) {
    if (state.log_inf.empty()) {
      state.log_inf = log_state;
    } else {
      add_into(state.log_inf, log_state);
      log_normalize_into(state.log_inf);
    }
  }
  state.horizon.push_back({scan_id, std::move(log_state)});
  state.last_scan = scan_id;
  if (state.horizon.size() <= config_.horizon_length) return;

  if (config_.policy == HorizonPolicy::fuse_to_infinite) {
    auto& oldest = state.horizon.front().log_state;
    if (state.log_inf.empty()) {
      state.log_inf = std::move(oldest);
    } else {
      add_into(state.log_inf, oldest);
      log_normalize_into(state.log_inf);
    }
  }
  state.horizon.pop_front();
}

void VoxelMap::integrate_scan(const SemanticCloud& cloud, std::int64_t scan_id) {
  if (last_scan_id_ && scan_id <= *last_scan_id_)
    throw ContractViolation("scan id " + std::to_string(scan_id) + " does not follow " +
                            std::to_string(*last_scan_id_));
  if (cloud.num_classes() != num_classes_)
    throw ConfigError("cloud has " + std::to_string(cloud.num_classes()) + " classes, map has " +
                      std::to_string(num_classes_));
  last_scan_id_ = scan_id;

  const std::size_t C = num_classes_;
  const bool product = config_.scan_merge == ScanMerge::product;
  std::unordered_map<VoxelKey, std::size_t, VoxelKeyHash> slot_of;
  slot_of.reserve(cloud.size() / 4 + 16);
  std::vector<VoxelKey> keys;
  std::vector<double> acc;
  std::vector<Eigen::Vector3d> pos_sum;
  std::vector<std::uint32_t> count;

  // Neighbouring returns usually share a voxel, so the last lookup is reused.
  std::optional<VoxelKey> last_key;
  std::size_t last_slot = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d p = cloud.point(i).cast<double>();
    const VoxelKey key = voxel_key(p, config_.voxel_size);
    if (key != last_key) {
      const auto [it, inserted] = slot_of.try_emplace(key, keys.size());
      if (inserted) {
        keys.push_back(key);
        acc.resize(acc.size() + C, product ? 1.0 : 0.0);
        pos_sum.push_back(Eigen::Vector3d::Zero());
        count.push_back(0);
      }
      last_key = key;
      last_slot = it->second;
    }
    const std::size_t s = last_slot;
    std::span<double> a(acc.data() + s * C, C);
    const auto d = cloud.distribution(i);
    if (product) {
      // The product is kept relative to its largest entry; the common scale
      // cancels in the normalization below, and the rescale threshold keeps
      // every entry above the floor ratio representable.
      double peak = 0.0;
      for (std::size_t k = 0; k < C; ++k) {
        a[k] *= std::max(d[k], kProbabilityFloor);
        peak = std::max(peak, a[k]);
      }
      if (peak < 1e-200)
        for (double& v : a) v /= peak;
    } else {
      add_into(a, d);
    }
    pos_sum[s] += p;
    ++count[s];
  }

  for (std::size_t s = 0; s < keys.size(); ++s) {
    // Normalizing in the linear domain gives the same state as log_normalize_into
    // without a log-sum-exp per voxel.
    const std::span<const double> a(acc.data() + s * C, C);
    double sum = 0.0;
    for (double v : a) sum += v;
    std::vector<double> state_log(C);
    for (std::size_t k = 0; k < C; ++k) state_log[k] = std::max(std::log(a[k] / sum), kLogProbabilityFloor);

    VoxelState& state = table_[keys[s]];
    const double n_old = state.n_points;
    const double n_new = n_old + count[s];
    state.mean_pos = (state.mean_pos * n_old + pos_sum[s]) / n_new;
    state.n_points += count[s];
    push_scan_state(state, scan_id, std::move(state_log));
  }

  if (config_.max_voxels > 0 && table_.size() > config_.max_voxels) evict_least_recent();
}

void VoxelMap::evict_least_recent() {
  std::vector<std::pair<std::int64_t, VoxelKey>> order;
  order.reserve(table_.size());
  for (const auto& [key, state] : table_) order.emplace_back(state.last_scan, key);
  const std::size_t excess = table_.size() - config_.max_voxels;
  std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(excess - 1), order.end());
  for (std::size_t i = 0; i < excess; ++i) table_.erase(order[i].second);
}

void VoxelMap::distribution_into(const VoxelState& state, Horizon horizon, std::span<double> out) const {
  const std::size_t C = num_classes_;
  // Snapshots restore only the infinite state, so an empty deque falls back to it.
  if ((horizon == Horizon::infinite && config_.policy == HorizonPolicy::drop) || state.horizon.empty()) {
    exponentiate_into(state.log_inf, out);
    return;
  }
  std::vector<double> sum(C, 0.0);
  if (horizon == Horizon::infinite && !state.log_inf.empty()) add_into(sum, state.log_inf);
  for (const auto& entry : state.horizon) add_into(sum, entry.log_state);
  log_normalize_into(sum);
  exponentiate_into(sum, out);
}

std::optional<VoxelQuery> VoxelMap::query(const VoxelKey& key, Horizon horizon) const {
  const VoxelState* state = find(key);
  if (!state) return std::nullopt;
  std::vector<double> p(num_classes_);
  distribution_into(*state, horizon, p);
  return VoxelQuery{unchecked_distribution(std::move(p)), state->mean_pos, state->n_points};
}

const VoxelState* VoxelMap::find(const VoxelKey& key) const {
  const auto it = table_.find(key);
  return it == table_.end() ? nullptr : &it->second;
}

std::vector<VoxelKey> VoxelMap::sorted_keys() const {
  std::vector<VoxelKey> keys;
  keys.reserve(table_.size());
  for (const auto& entry : table_) keys.push_back(entry.first);
  std::sort(keys.begin(), keys.end());
  return keys;
}

SemanticCloud VoxelMap::export_cloud(Horizon horizon) const {
  SemanticCloud cloud(num_classes_, "world");
  cloud.reserve(table_.size());
  std::vector<double> p(num_classes_);
  for (const VoxelKey& key : sorted_keys()) {
    const VoxelState& state = table_.at(key);
    distribution_into(state, horizon, p);
    cloud.push_back(state.mean_pos.cast<float>(), 0.0f, p);
  }
  return cloud;
}

void VoxelMap::restore(const VoxelKey& key, VoxelState state) {
  if (state.log_inf.size() != num_classes_ && state.horizon.empty())
    throw InvalidInput("restored voxel has " + std::to_string(state.log_inf.size()) + " classes, map has " +
                       std::to_string(num_classes_));
  for (const auto& entry : state.horizon)
    if (entry.log_state.size() != num_classes_) throw InvalidInput("restored horizon entry has wrong class count");
  table_[key] = std::move(state);
}

}  // namespace semfuse
