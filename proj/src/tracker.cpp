#include "shoal/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace shoal {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("TrackerConfig: ") + what);
}

void commit_match(Track& track, int frame, const Detection& det) {
  track.history.insert_or_assign(frame, HistoryEntry{det.box, det.confidence, false});
  track.last_seen = frame;
  track.last_detection = det;
  track.entity_cache.reset();
  track.status = TrackStatus::kActive;
  track.lost_since.reset();
}

Track& new_track(TrackerState& state) {
  const int id = state.next_id++;
  Track& t = state.tracks[id];
  t.id = id;
  return t;
}

const BinaryMask* track_entity(Track& track, const MaskSource* masks) {
  if (!track.entity_cache && masks && track.last_detection) {
    track.entity_cache = masks->resolve(*track.last_detection);
  }
  return track.entity_cache ? &*track.entity_cache : nullptr;
}

bool near_boundary(const BBox& box, const TrackerConfig& config) {
  if (!config.arena) return false;
  const BBox& arena = *config.arena;
  const double mx = config.boundary_margin.value_or(box.w());
  const double my = config.boundary_margin.value_or(box.h());
  const Point c = center(box);
  return c.x - arena.x() <= mx || arena.right() - c.x <= mx || c.y - arena.y() <= my ||
         arena.bottom() - c.y <= my;
}

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

void spawn_or_record(TrackerState& state, int frame, std::span<const Detection> detections,
                     std::vector<char>& claimed, const TrackerConfig& config,
                     RefindOutcome& outcome) {
  std::vector<std::size_t> free_dets;
  for (std::size_t d = 0; d < detections.size(); ++d)
    if (!claimed[d]) free_dets.push_back(d);

  if (config.population_mode == PopulationMode::kFixed) {
    for (auto d : free_dets) state.unclaimed.emplace_back(frame, d);
    state.pending.clear();
    return;
  }

  // Extend chains that ended on the previous frame; everything else restarts.
  std::vector<PendingSpawn> live;
  for (auto& p : state.pending)
    if (!p.chain.empty() && p.chain.back().frame == frame - 1) live.push_back(std::move(p));

  std::vector<BBox> chain_boxes, det_boxes;
  for (const auto& p : live) chain_boxes.push_back(p.chain.back().box);
  for (auto d : free_dets) det_boxes.push_back(detections[d].box);
  const Matching m = solve(iou_cost_matrix(chain_boxes, det_boxes, config.tau_match));

  std::vector<std::optional<std::size_t>> chain_for_det(free_dets.size());
  for (const auto& [r, c] : m.pairs) chain_for_det[c] = r;

  const auto needed = static_cast<std::size_t>(std::max(1, config.spawn_delay));
  std::vector<PendingSpawn> next;
  for (std::size_t i = 0; i < free_dets.size(); ++i) {
    PendingSpawn p;
    if (chain_for_det[i]) p = std::move(live[*chain_for_det[i]]);
    p.chain.push_back(detections[free_dets[i]]);
    if (p.chain.size() >= needed) {
      Track& t = new_track(state);
      for (const auto& det : p.chain) commit_match(t, det.frame, det);
      claimed[free_dets[i]] = 1;
      outcome.spawned.push_back(t.id);
    } else {
      next.push_back(std::move(p));
    }
  }
  state.pending = std::move(next);
}

}  // namespace

void TrackerConfig::validate() const {
  require(tau_match > 0.0 && tau_match <= 1.0, "tau_match must be in (0,1]");
  require(tau_ambiguous > 0.0 && tau_ambiguous <= 1.0, "tau_ambiguous must be in (0,1]");
  require(alpha >= 0.0 && alpha <= 1.0, "alpha must be in [0,1]");
  require(k >= 1, "k must be a positive integer");
  require(spawn_delay >= 0, "spawn_delay must be non-negative");
  require(!boundary_margin || *boundary_margin >= 0.0, "boundary_margin must be non-negative");
  require(!entity.fixed_level || (*entity.fixed_level >= 0 && *entity.fixed_level <= 255),
          "fixed binarization level must be in [0,255]");
}

std::optional<BinaryMask> InMemoryMaskSource::resolve(const Detection& detection) const {
  if (!detection.mask_ref) return std::nullopt;
  auto it = masks_.find(*detection.mask_ref);
  if (it == masks_.end()) return std::nullopt;
  return it->second;
}

std::vector<int> TrackerState::ids_with_status(TrackStatus status) const {
  std::vector<int> ids;
  for (const auto& [id, t] : tracks)
    if (t.status == status) ids.push_back(id);
  return ids;
}

TrackerState init(int frame, std::span<const Detection> detections, const TrackerConfig& config) {
  config.validate();
  if (frame < 0) throw std::invalid_argument("init: negative frame index");
  TrackerState state;
  state.frame = frame;
  for (const auto& det : detections) commit_match(new_track(state), frame, det);
  return state;
}

IouMatrix compute_overlaps(const TrackerState& state, std::span<const Detection> detections) {
  IouMatrix m;
  m.track_ids = state.ids_with_status(TrackStatus::kActive);
  m.detections = detections.size();
  m.values.reserve(m.track_ids.size() * detections.size());
  for (int id : m.track_ids) {
    const BBox& last = state.tracks.at(id).last_box();
    for (const auto& det : detections) m.values.push_back(iou(last, det.box));
  }
  return m;
}

Ambiguities detect_ambiguities(const IouMatrix& ious, double tau) {
  const std::size_t rows = ious.rows();
  const std::size_t cols = ious.detections;
  std::vector<int> row_hits(rows, 0), col_hits(cols, 0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      if (ious(r, c) > tau) {
        ++row_hits[r];
        ++col_hits[c];
      }

  Ambiguities out;
  std::vector<char> row_in(rows, 0), col_in(cols, 0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      if (ious(r, c) > tau && (row_hits[r] >= 2 || col_hits[c] >= 2)) {
        out.flagged.emplace(r, c);
        row_in[r] = col_in[c] = 1;
      }
  for (std::size_t r = 0; r < rows; ++r)
    if (row_in[r]) out.rows.push_back(r);
  for (std::size_t c = 0; c < cols; ++c)
    if (col_in[c]) out.cols.push_back(c);
  return out;
}

StageMatches basic_associate(TrackerState& state, int frame, std::span<const Detection> detections,
                             const IouMatrix& ious, const Ambiguities& ambiguities,
                             const TrackerConfig& config) {
  std::vector<char> row_blocked(ious.rows(), 0), col_blocked(detections.size(), 0);
  for (auto r : ambiguities.rows) row_blocked[r] = 1;
  for (auto c : ambiguities.cols) col_blocked[c] = 1;

  std::vector<std::size_t> rows, cols;
  for (std::size_t r = 0; r < ious.rows(); ++r)
    if (!row_blocked[r]) rows.push_back(r);
  for (std::size_t c = 0; c < detections.size(); ++c)
    if (!col_blocked[c]) cols.push_back(c);

  CostMatrix costs(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const double v = ious(rows[i], cols[j]);
      if (v >= config.tau_match) costs(i, j) = 1.0 - v;
    }

  StageMatches out;
  for (const auto& [i, j] : solve(costs).pairs) {
    out.pairs.emplace_back(rows[i], cols[j]);
    commit_match(state.tracks.at(ious.track_ids[rows[i]]), frame, detections[cols[j]]);
  }
  return out;
}

StageMatches interaction_associate(TrackerState& state, int frame,
                                   std::span<const Detection> detections, const IouMatrix& ious,
                                   const Ambiguities& ambiguities, const MaskSource* masks,
                                   const TrackerConfig& config) {
  StageMatches out;
  if (ambiguities.empty()) return out;
  const auto& rows = ambiguities.rows;
  const auto& cols = ambiguities.cols;

  std::map<std::size_t, std::optional<BinaryMask>> det_entities;
  auto det_entity = [&](std::size_t c) -> const std::optional<BinaryMask>& {
    auto it = det_entities.find(c);
    if (it == det_entities.end()) {
      it = det_entities.emplace(c, masks ? masks->resolve(detections[c]) : std::nullopt).first;
    }
    return it->second;
  };

  CostMatrix costs(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Track& track = state.tracks.at(ious.track_ids[rows[i]]);
    const BinaryMask* track_mask = track_entity(track, masks);
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (!ambiguities.flagged.contains({rows[i], cols[j]})) continue;
      InteractionRecord rec;
      rec.frame = frame;
      rec.track_id = track.id;
      rec.detection = cols[j];
      rec.box_iou = ious(rows[i], cols[j]);
      const auto& det_mask = det_entity(cols[j]);
      if (track_mask && det_mask) {
        rec.entity_iou = entity_iou(*track_mask, *det_mask);
        rec.score = config.alpha * rec.box_iou + (1.0 - config.alpha) * *rec.entity_iou;
        rec.track_entity = *track_mask;
        rec.detection_entity = *det_mask;
      } else {
        rec.score = rec.box_iou;
        state.warnings.push_back(
            {frame, "no entity mask for track " + std::to_string(track.id) + " / detection " +
                        std::to_string(cols[j]) + "; using box IoU"});
      }
      if (rec.score >= config.tau_match) costs(i, j) = 1.0 - rec.score;
      state.interaction_log.push_back(std::move(rec));
    }
  }

  for (const auto& [i, j] : solve(costs).pairs) {
    out.pairs.emplace_back(rows[i], cols[j]);
    commit_match(state.tracks.at(ious.track_ids[rows[i]]), frame, detections[cols[j]]);
  }
  return out;
}

RefindOutcome refind_update(TrackerState& state, int frame, std::span<const Detection> detections,
                            std::vector<char>& claimed, const std::set<int>& matched_ids,
                            const TrackerConfig& config) {
  RefindOutcome outcome;

  for (int id : state.ids_with_status(TrackStatus::kActive)) {
    if (matched_ids.contains(id)) continue;
    Track& t = state.tracks.at(id);
    if (!config.enable_refind || near_boundary(t.last_box(), config)) {
      t.status = TrackStatus::kTerminated;
      outcome.terminated.push_back(id);
    } else {
      t.status = TrackStatus::kLost;
      t.lost_since = frame;
      outcome.lost.push_back(id);
    }
  }

  for (int id : state.ids_with_status(TrackStatus::kLost)) {
    Track& t = state.tracks.at(id);
    if (frame - *t.lost_since > config.k) {
      t.status = TrackStatus::kTerminated;
      outcome.terminated.push_back(id);
    }
  }

  // A reserved id may only come back while it is still unassigned this frame.
  std::vector<int> reserved;
  for (int id : state.ids_with_status(TrackStatus::kLost))
    if (!matched_ids.contains(id)) reserved.push_back(id);

  std::vector<std::size_t> free_dets;
  for (std::size_t d = 0; d < detections.size(); ++d)
    if (!claimed[d]) free_dets.push_back(d);

  if (!reserved.empty() && !free_dets.empty()) {
    CostMatrix costs(reserved.size(), free_dets.size());
    for (std::size_t i = 0; i < reserved.size(); ++i) {
      const BBox& last = state.tracks.at(reserved[i]).last_box();
      const BBox region = buffer_region(last, config.k);
      for (std::size_t j = 0; j < free_dets.size(); ++j) {
        const Point p = center(detections[free_dets[j]].box);
        if (contains(region, p)) costs(i, j) = distance(center(last), p);
      }
    }
    for (const auto& [i, j] : solve(costs).pairs) {
      Track& t = state.tracks.at(reserved[i]);
      const Detection& det = detections[free_dets[j]];
      const int gap = frame - t.last_seen - 1;
      const auto filled = interpolate_boxes(t.last_box(), det.box, gap);
      for (int g = 0; g < gap; ++g) {
        t.history.insert_or_assign(t.last_seen + 1 + g,
                                   HistoryEntry{filled[static_cast<std::size_t>(g)], 0.0, true});
      }
      commit_match(t, frame, det);
      claimed[free_dets[j]] = 1;
      outcome.refound.emplace_back(t.id, free_dets[j]);
    }
  }

  spawn_or_record(state, frame, detections, claimed, config, outcome);
  return outcome;
}

FrameOutput step(TrackerState& state, int frame, std::span<const Detection> detections,
                 const MaskSource* masks, const TrackerConfig& config) {
  for (const auto& det : detections) {
    if (det.frame != frame) {
      throw std::invalid_argument("step: detection for frame " + std::to_string(det.frame) +
                                  " passed with frame " + std::to_string(frame));
    }
  }
  if (state.frame && frame <= *state.frame) {
    throw std::invalid_argument("step: frame " + std::to_string(frame) +
                                " does not follow frame " + std::to_string(*state.frame));
  }

  if (!state.frame) {
    state = init(frame, detections, config);
  } else {
    config.validate();
    const IouMatrix ious = compute_overlaps(state, detections);
    const Ambiguities ambiguities =
        config.enable_interaction ? detect_ambiguities(ious, config.tau_ambiguous) : Ambiguities{};

    std::vector<char> claimed(detections.size(), 0);
    std::set<int> matched_ids;
    auto mark = [&](const StageMatches& m) {
      for (const auto& [r, c] : m.pairs) {
        claimed[c] = 1;
        matched_ids.insert(ious.track_ids[r]);
      }
    };
    mark(basic_associate(state, frame, detections, ious, ambiguities, config));
    mark(interaction_associate(state, frame, detections, ious, ambiguities, masks, config));
    refind_update(state, frame, detections, claimed, matched_ids, config);
    state.frame = frame;
  }

  FrameOutput out;
  out.frame = frame;
  for (const auto& [id, t] : state.tracks)
    if (t.status == TrackStatus::kActive) out.objects.push_back({id, t.last_box()});
  return out;
}

TrajectorySet finalize(const TrackerState& state) {
  TrajectorySet out;
  for (const auto& [id, t] : state.tracks) {
    auto& points = out[id];
    for (const auto& [frame, entry] : t.history) {
      if (frame > t.last_seen) break;
      points.push_back({frame, entry.box, entry.confidence, entry.interpolated});
    }
  }
  return out;
}

TrajectorySet track_sequence(const FrameDetections& detections, const MaskSource* masks,
                             const TrackerConfig& config, TrackerState* final_state) {
  TrackerState state;
  if (!detections.empty()) {
    const int first = detections.begin()->first;
    const int last = detections.rbegin()->first;
    const std::vector<Detection> none;
    for (int f = first; f <= last; ++f) {
      auto it = detections.find(f);
      step(state, f, it == detections.end() ? std::span<const Detection>(none)
                                            : std::span<const Detection>(it->second),
           masks, config);
    }
  }
  TrajectorySet out = finalize(state);
  if (final_state) *final_state = std::move(state);
  return out;
}

}  // namespace shoal
