#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shoal/geometry.hpp"

namespace shoal {

/// One detector output. `mask_ref` names a crop or mask file (or an in-memory
/// key) that a MaskSource can resolve.
struct Detection {
  int frame = 0;
  BBox box{0, 0, 1, 1};
  double confidence = 1.0;
  std::optional<std::string> mask_ref;
};

using FrameDetections = std::map<int, std::vector<Detection>>;

struct TrackPoint {
  int frame = 0;
  BBox box{0, 0, 1, 1};
  double confidence = 1.0;
  bool interpolated = false;
};

/// id -> frame-sorted points.
using TrajectorySet = std::map<int, std::vector<TrackPoint>>;

struct FrameObject {
  int id = 0;
  BBox box{0, 0, 1, 1};
};

/// frame -> objects present in that frame, sorted by id.
std::map<int, std::vector<FrameObject>> index_by_frame(const TrajectorySet& set);

std::size_t point_count(const TrajectorySet& set);

}  // namespace shoal
