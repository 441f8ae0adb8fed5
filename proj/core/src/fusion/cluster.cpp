#include "semfuse/fusion/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "semfuse/core/errors.hpp"

namespace semfuse {

double cluster_tolerance(double seed_depth, const SphericalModel& model, double factor) {
  return factor * seed_depth * model.vertical_fov() / static_cast<double>(model.height);
}

std::size_t ClusterResult::member_count() const {
  return static_cast<std::size_t>(std::count(members.begin(), members.end(), std::uint8_t{1}));
}

namespace {

struct CellHash {
  std::size_t operator()(const Eigen::Vector3i& c) const noexcept {
    return (static_cast<std::size_t>(c.x()) * 73856093u) ^ (static_cast<std::size_t>(c.y()) * 19349663u) ^
           (static_cast<std::size_t>(c.z()) * 83492791u);
  }
};

struct CellEqual {
  bool operator()(const Eigen::Vector3i& a, const Eigen::Vector3i& b) const noexcept { return a == b; }
};

bool depth_less(const BoxPoint& a, const BoxPoint& b) {
  if (a.depth != b.depth) return a.depth < b.depth;
  return std::lexicographical_compare(a.position.data(), a.position.data() + 3, b.position.data(),
                                      b.position.data() + 3);
}

}  // namespace

ClusterResult cluster_bbox_points(std::span<const BoxPoint> points, const SphericalModel& model, double factor) {
  if (points.empty()) throw ContractViolation("cannot cluster an empty set of box points");
  const std::size_t n = points.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t rank = static_cast<std::size_t>(std::ceil(0.25 * static_cast<double>(n)));
  const auto kth = order.begin() + static_cast<std::ptrdiff_t>(std::max<std::size_t>(rank, 1) - 1);
  std::nth_element(order.begin(), kth, order.end(),
                   [&](std::size_t a, std::size_t b) { return depth_less(points[a], points[b]); });

  ClusterResult result;
  result.seed = *kth;
  result.seed_depth = points[result.seed].depth;
  result.tolerance = cluster_tolerance(result.seed_depth, model, factor);
  result.members.assign(n, 0);
  result.members[result.seed] = 1;

  const double tau = result.tolerance;
  if (!(tau > 0.0)) return result;
  const double tau2 = tau * tau;

  // Uniform grid with cell size tau: all neighbours within tau lie in the 27
  // surrounding cells.
  auto cell_of = [&](const Eigen::Vector3d& p) -> Eigen::Vector3i {
    return (p / tau).array().floor().cast<int>();
  };
  std::unordered_map<Eigen::Vector3i, std::vector<std::size_t>, CellHash, CellEqual> grid;
  grid.reserve(n);
  for (std::size_t i = 0; i < n; ++i) grid[cell_of(points[i].position)].push_back(i);

  std::vector<std::size_t> frontier{result.seed};
  while (!frontier.empty()) {
    const std::size_t i = frontier.back();
    frontier.pop_back();
    const Eigen::Vector3i c = cell_of(points[i].position);
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dz = -1; dz <= 1; ++dz) {
          auto it = grid.find(c + Eigen::Vector3i(dx, dy, dz));
          if (it == grid.end()) continue;
          for (std::size_t j : it->second) {
            if (result.members[j]) continue;
            if ((points[j].position - points[i].position).squaredNorm() <= tau2) {
              result.members[j] = 1;
              frontier.push_back(j);
            }
          }
        }
  }
  return result;
}

}  // namespace semfuse
