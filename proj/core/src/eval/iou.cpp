#include "semfuse/eval/iou.hpp"

#include <string>

#include "semfuse/core/errors.hpp"
#include "semfuse/core/probability.hpp"

namespace semfuse {

ConfusionAccumulator::ConfusionAccumulator(std::size_t num_classes, std::optional<std::size_t> unknown_class)
    : tp_(num_classes, 0), fp_(num_classes, 0), fn_(num_classes, 0), unknown_(unknown_class) {}

void ConfusionAccumulator::add(std::size_t predicted, std::size_t reference) {
  if (predicted >= tp_.size() || reference >= tp_.size()) throw ContractViolation("class index out of range");
  if (predicted == reference) {
    ++tp_[predicted];
    return;
  }
  ++fn_[reference];
  if (predicted != unknown_) ++fp_[predicted];
}

void ConfusionAccumulator::add_missed(std::size_t reference) { ++fn_.at(reference); }

void ConfusionAccumulator::add_spurious(std::size_t predicted) { ++fp_.at(predicted); }

void ConfusionAccumulator::merge(const ConfusionAccumulator& other) {
  if (other.num_classes() != num_classes()) throw ContractViolation("merging accumulators of different sizes");
  for (std::size_t c = 0; c < tp_.size(); ++c) {
    tp_[c] += other.tp_[c];
    fp_[c] += other.fp_[c];
    fn_[c] += other.fn_[c];
  }
}

IouResult compute_iou(const ConfusionAccumulator& acc, const IouOptions& options, bool restricted_fov) {
  IouResult result;
  result.restricted_fov = restricted_fov;
  result.per_class.resize(acc.num_classes());
  double sum = 0.0;
  for (std::size_t c = 0; c < acc.num_classes(); ++c) {
    const std::uint64_t denom = acc.tp(c) + acc.fp(c) + acc.fn(c);
    if (denom == 0) continue;
    const double iou = static_cast<double>(acc.tp(c)) / static_cast<double>(denom);
    result.per_class[c] = iou;
    const bool in_reference = acc.tp(c) + acc.fn(c) > 0;
    if (in_reference || options.include_empty_classes) {
      sum += iou;
      ++result.classes_in_mean;
    }
  }
  if (result.classes_in_mean > 0) result.mean = sum / static_cast<double>(result.classes_in_mean);
  return result;
}

bool CameraFrustum::contains(const Eigen::Vector3d& p_world) const {
  return project_pinhole(T_cam_world * p_world, camera).ok();
}

namespace {

void check_labels(std::size_t cloud_classes, const VoxelMap& reference, const LabelSet& labels) {
  if (cloud_classes != labels.size() || reference.num_classes() != labels.size())
    throw ConfigError("label sets differ: prediction has " + std::to_string(cloud_classes) + " classes, reference " +
                      std::to_string(reference.num_classes()) + ", label set " + std::to_string(labels.size()));
}

std::size_t reference_label(const VoxelMap& map, const VoxelState& state, std::span<double> buf) {
  map.distribution_into(state, Horizon::infinite, buf);
  return argmax(buf);
}

}  // namespace

void accumulate_scan_vs_map(ConfusionAccumulator& acc, const SemanticCloud& cloud, const VoxelMap& reference,
                            const LabelSet& labels, const CameraFrustum* restrict) {
  check_labels(cloud.num_classes(), reference, labels);
  const auto unknown = labels.unknown_index();
  const double vs = reference.config().voxel_size;
  std::vector<double> buf(labels.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d p = cloud.point(i).cast<double>();
    if (restrict && !restrict->contains(p)) continue;
    const VoxelState* state = reference.find(voxel_key(p, vs));
    if (!state) continue;
    const std::size_t ref = reference_label(reference, *state, buf);
    if (restrict && ref == unknown) continue;
    acc.add(argmax(cloud.distribution(i)), ref);
  }
}

IouResult iou_scan_vs_map(const SemanticCloud& cloud, const VoxelMap& reference, const LabelSet& labels,
                          const CameraFrustum* restrict, const IouOptions& options) {
  ConfusionAccumulator acc(labels.size(), labels.unknown_index());
  accumulate_scan_vs_map(acc, cloud, reference, labels, restrict);
  return compute_iou(acc, options, restrict != nullptr);
}

void accumulate_map_vs_map(ConfusionAccumulator& acc, const VoxelMap& predicted, const VoxelMap& reference,
                           const LabelSet& labels) {
  check_labels(predicted.num_classes(), reference, labels);
  if (predicted.config().voxel_size != reference.config().voxel_size)
    throw ConfigError("voxel sizes differ: " + std::to_string(predicted.config().voxel_size) + " vs " +
                      std::to_string(reference.config().voxel_size));
  const auto unknown = labels.unknown_index();
  std::vector<double> buf(labels.size());

  for (const auto& [key, ref_state] : reference.table()) {
    const std::size_t ref = reference_label(reference, ref_state, buf);
    if (ref == unknown) continue;
    if (const VoxelState* pred_state = predicted.find(key))
      acc.add(reference_label(predicted, *pred_state, buf), ref);
    else
      acc.add_missed(ref);
  }
  for (const auto& [key, pred_state] : predicted.table()) {
    if (reference.find(key)) continue;
    const std::size_t pred = reference_label(predicted, pred_state, buf);
    if (pred != unknown) acc.add_spurious(pred);
  }
}

IouResult iou_map_vs_map(const VoxelMap& predicted, const VoxelMap& reference, const LabelSet& labels,
                         const IouOptions& options) {
  ConfusionAccumulator acc(labels.size(), labels.unknown_index());
  accumulate_map_vs_map(acc, predicted, reference, labels);
  return compute_iou(acc, options, false);
}

}  // namespace semfuse
