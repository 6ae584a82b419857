#pragma once

#include <string>

#include "shoal/trajectory.hpp"

namespace shoal {

/// Standalone SVG with one polyline of box centers per track, colored by id.
std::string render_svg(const TrajectorySet& tracks, double width_px = 800.0);

}  // namespace shoal
