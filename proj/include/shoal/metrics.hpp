#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "shoal/trajectory.hpp"

namespace shoal {

/// Counters of the CLEAR protocol. `mota` is empty when the ground truth has
/// no objects at all.
struct ClearResult {
  std::optional<double> mota;
  std::size_t fn = 0;
  std::size_t fp = 0;
  std::size_t idsw = 0;
  std::size_t gt_total = 0;
  std::size_t matches = 0;
};

/// Identity counters under the best one-to-one trajectory matching. Ratios are
/// empty when their denominator is zero.
struct IdResult {
  std::optional<double> idf1;
  std::optional<double> idp;
  std::optional<double> idr;
  std::size_t idtp = 0;
  std::size_t idfp = 0;
  std::size_t idfn = 0;
};

/// Per frame: keep last frame's correspondences that still overlap by at least
/// `iou_gate`, Hungarian-match the rest, then count unmatched ground truth as
/// FN, unmatched hypotheses as FP, and a ground-truth object matched to a
/// different hypothesis than its previous match as an identity switch.
ClearResult clear_mot(const TrajectorySet& gt, const TrajectorySet& hyp, double iou_gate = 0.5);

IdResult id_metrics(const TrajectorySet& gt, const TrajectorySet& hyp, double iou_gate = 0.5);

/// Frames where the two trajectories overlap by at least `iou_gate`, for every
/// (gt, hyp) pair in ascending id order. Row-major gt x hyp.
std::vector<std::size_t> trajectory_overlap_counts(const TrajectorySet& gt, const TrajectorySet& hyp,
                                                   double iou_gate);

struct SequenceMetrics {
  std::string name;
  ClearResult clear;
  IdResult id;
};

struct MetricsReport {
  std::optional<double> mota;
  std::optional<double> idf1;
  std::optional<double> idp;
  std::optional<double> idr;
  ClearResult clear;  // summed counters
  IdResult id;        // summed counters
  double iou_gate = 0.5;
  std::vector<SequenceMetrics> sequences;
};

SequenceMetrics evaluate_sequence(std::string name, const TrajectorySet& gt,
                                  const TrajectorySet& hyp, double iou_gate = 0.5);

/// Sums counters over sequences and recomputes every ratio from the totals.
MetricsReport combine(std::vector<SequenceMetrics> sequences, double iou_gate);

std::string format_text(const MetricsReport& report);
std::string format_json(const MetricsReport& report);

}  // namespace shoal
