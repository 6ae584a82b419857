#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "shoal/geometry.hpp"
#include "shoal/masks.hpp"
#include "shoal/tracker.hpp"
#include "shoal/trajectory.hpp"

namespace shoal {

/// Forces agents `agent_a` and `agent_b` (0-based) to pass each other at
/// `frame`, `offset` pixels apart, on perpendicular headings.
struct CrossingEvent {
  int agent_a = 0;
  int agent_b = 1;
  int frame = 1;
};

struct ScenarioConfig {
  int n_agents = 10;
  int n_frames = 300;
  BBox arena{0, 0, 1000, 1000};
  double body_w = 40.0;
  double body_h = 16.0;
  double speed = 4.0;          // pixels per frame
  double turn_sigma = 0.15;    // radians per frame
  double dropout_p = 0.0;
  double jitter_sigma = 0.0;   // pixels, applied to x, y, w, h of each detection
  std::vector<CrossingEvent> crossing_script;
  std::optional<double> crossing_offset;  // defaults to half the body height
  double crossing_angle = std::numbers::pi / 2;  // heading difference at the crossing frame
  // When set, the body is an ellipse of length body_w and width body_h turned
  // to the heading, and the box is its bounding box. Otherwise the ellipse is
  // axis-aligned and inscribed in a fixed body_w x body_h box.
  bool oriented_bodies = false;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument for any infeasible setting.
  void validate() const;
};

struct DroppedDetection {
  int frame = 0;
  int id = 0;
};

/// Frames run 1..n_frames; ground-truth ids are 1..n_agents. Detections are
/// shuffled within each frame and carry mask_ref keys resolvable through
/// `masks`.
struct Scenario {
  TrajectorySet gt;
  FrameDetections detections;
  InMemoryMaskSource masks;
  std::map<std::string, GrayCrop> crops;  // same keys as masks
  std::vector<DroppedDetection> dropped;
};

Scenario generate(const ScenarioConfig& config);

/// Ellipse with semi-axes along `heading` (major) and across it (minor).
struct Body {
  Point center;
  double semi_major = 1.0;
  double semi_minor = 1.0;
  double heading = 0.0;

  BBox bounding_box() const;
  bool covers(Point p) const;
};

/// Axis-aligned ellipse inscribed in `box`.
Body inscribed_body(const BBox& box);

/// Every body in `bodies` drawn dark on a light background, sampled at pixel
/// centers over the integer raster of `anchor`.
GrayCrop render_crop(const BBox& anchor, const std::vector<Body>& bodies);

struct AdjacentIouStats {
  static constexpr std::size_t kBins = 20;
  std::optional<double> mean;             // pooled over every consecutive pair
  std::array<std::size_t, kBins> histogram{};  // equal bins over [0,1]; 1.0 lands in the last
  std::map<int, double> per_track_mean;
  std::size_t pairs = 0;
};

/// IoU between each track's boxes on consecutive frames (t, t+1).
AdjacentIouStats adjacent_iou_stats(const TrajectorySet& trajectories);

}  // namespace shoal
