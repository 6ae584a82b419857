#include "shoal/trajectory.hpp"

namespace shoal {

std::map<int, std::vector<FrameObject>> index_by_frame(const TrajectorySet& set) {
  std::map<int, std::vector<FrameObject>> out;
  for (const auto& [id, points] : set)
    for (const auto& p : points) out[p.frame].push_back({id, p.box});
  return out;
}

std::size_t point_count(const TrajectorySet& set) {
  std::size_t n = 0;
  for (const auto& [id, points] : set) n += points.size();
  return n;
}

}  // namespace shoal
