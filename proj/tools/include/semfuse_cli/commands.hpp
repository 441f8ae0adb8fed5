#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "semfuse/eval/iou.hpp"
#include "semfuse_cli/run_config.hpp"

namespace semfuse::cli {

/// Writes a synthetic log for `config.scene` into `config.output_dir`.
void cmd_synth(const RunConfig& config, std::ostream& out);

struct FuseSummary {
  std::size_t scans = 0;
  std::size_t frames = 0;
  std::size_t points_in_camera = 0;
  std::size_t detection_members = 0;
  std::size_t border_resets = 0;
};

/// Writes one fused cloud per scan to `clouds_path()` and one fused frame per
/// image to `output_dir/frames/<camera>/`.
FuseSummary cmd_fuse(const RunConfig& config, std::ostream& out);

struct MapSummary {
  std::size_t scans = 0;
  std::size_t voxels = 0;
  /// Voxel count per argmax class, excluding uninformed voxels.
  std::vector<std::size_t> histogram;
  /// Voxels whose distribution is still uniform (never seen by a camera in a
  /// camera-only run).
  std::size_t uninformed = 0;
};

/// Integrates the fused clouds in timestamp order and writes `map_path()`.
MapSummary cmd_map(const RunConfig& config, std::ostream& out);

struct PseudoLabelSummary {
  std::size_t images = 0;
  std::size_t labeled_cells = 0;
  std::size_t valid_cells = 0;
};

/// Writes one training sample per scan to `output_dir/pseudolabels/<scan>/`.
PseudoLabelSummary cmd_pseudolabel(const RunConfig& config, std::ostream& out);

/// Scan mode compares fused clouds with a reference map, map mode two maps.
IouResult cmd_eval(const RunConfig& config, std::ostream& out);

struct LatencyStats {
  double p50_ms = 0.0;
  double p99_ms = 0.0;
};

struct BenchReport {
  std::size_t scan_points = 0;
  LatencyStats fuse_cloud;
  LatencyStats integrate_scan;
  LatencyStats scan_total;
  LatencyStats image;
  double points_per_second = 0.0;
  double frames_per_second = 0.0;
};

/// Times fuse_cloud + integrate_scan on a synthetic 128 x 1024 scan and
/// smooth_and_fuse_image on an 848 x 480 frame (sizes from the config).
BenchReport cmd_bench(const RunConfig& config, std::ostream& out);

/// Parses the command line and dispatches. Returns the process exit code;
/// errors are reported on `err` with file and line context when available.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace semfuse::cli
