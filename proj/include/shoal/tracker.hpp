#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "shoal/assignment.hpp"
#include "shoal/geometry.hpp"
#include "shoal/masks.hpp"
#include "shoal/trajectory.hpp"

namespace shoal {

enum class TrackStatus { kActive, kLost, kTerminated };

/// FIXED never creates identities after initialization; OPEN spawns a new
/// track once a detection stays unclaimed for `spawn_delay` frames.
enum class PopulationMode { kFixed, kOpen };

struct TrackerConfig {
  double tau_match = 0.3;      // minimum IoU (or combined score) to accept a match
  double tau_ambiguous = 0.1;  // IoU above which several overlaps count as contention
  double alpha = 0.5;          // weight of box IoU in the combined score
  int k = 10;                  // refind window in frames and buffer radius multiplier
  PopulationMode population_mode = PopulationMode::kOpen;
  int spawn_delay = 1;
  bool enable_interaction = true;
  bool enable_refind = true;
  // Tracks that vanish within `boundary_margin` of the arena edge are
  // terminated instead of buffered. Without an arena nothing is terminated
  // early. A missing margin means one box width (horizontally) and one box
  // height (vertically).
  std::optional<BBox> arena;
  std::optional<double> boundary_margin;
  EntityOptions entity;

  /// Throws std::invalid_argument naming the first out-of-range field.
  void validate() const;
};

struct HistoryEntry {
  BBox box{0, 0, 1, 1};
  double confidence = 1.0;
  bool interpolated = false;
};

struct Track {
  int id = 0;
  TrackStatus status = TrackStatus::kActive;
  std::map<int, HistoryEntry> history;
  int last_seen = 0;
  std::optional<int> lost_since;
  // Detection matched at last_seen; its mask is the track's entity.
  std::optional<Detection> last_detection;
  std::optional<BinaryMask> entity_cache;

  const BBox& last_box() const { return history.at(last_seen).box; }
};

/// Resolves a detection's mask_ref to a foreground mask in global coordinates.
class MaskSource {
 public:
  virtual ~MaskSource() = default;
  virtual std::optional<BinaryMask> resolve(const Detection& detection) const = 0;
};

/// Masks held in memory, keyed by Detection::mask_ref.
class InMemoryMaskSource : public MaskSource {
 public:
  void add(std::string key, BinaryMask mask) { masks_.insert_or_assign(std::move(key), std::move(mask)); }
  std::optional<BinaryMask> resolve(const Detection& detection) const override;
  std::size_t size() const { return masks_.size(); }

 private:
  std::map<std::string, BinaryMask> masks_;
};

struct TrackerWarning {
  int frame = 0;
  std::string message;
};

/// One scored (track, detection) pair from the interaction stage, kept so the
/// entity IoU can be audited afterwards.
struct InteractionRecord {
  int frame = 0;
  int track_id = 0;
  std::size_t detection = 0;
  double box_iou = 0.0;
  std::optional<double> entity_iou;
  double score = 0.0;
  std::optional<BinaryMask> track_entity;
  std::optional<BinaryMask> detection_entity;
};

struct PendingSpawn {
  std::vector<Detection> chain;  // consecutive frames, oldest first
};

struct TrackerState {
  std::map<int, Track> tracks;  // every track ever created, by id
  int next_id = 1;
  std::optional<int> frame;     // last processed frame
  std::vector<PendingSpawn> pending;
  std::vector<std::pair<int, std::size_t>> unclaimed;  // (frame, detection) never assigned
  std::vector<TrackerWarning> warnings;
  std::vector<InteractionRecord> interaction_log;

  std::vector<int> ids_with_status(TrackStatus status) const;
};

/// Box IoU between every ACTIVE track (ascending id) and every detection.
struct IouMatrix {
  std::vector<int> track_ids;
  std::size_t detections = 0;
  std::vector<double> values;

  std::size_t rows() const { return track_ids.size(); }
  double operator()(std::size_t r, std::size_t c) const { return values[r * detections + c]; }
};

struct Ambiguities {
  std::set<std::pair<std::size_t, std::size_t>> flagged;
  std::vector<std::size_t> rows;  // rows holding at least one flagged entry
  std::vector<std::size_t> cols;

  bool empty() const { return flagged.empty(); }
};

/// Result of one association stage, in IouMatrix row / detection indices.
struct StageMatches {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

struct RefindOutcome {
  std::vector<std::pair<int, std::size_t>> refound;  // (track id, detection)
  std::vector<int> lost;
  std::vector<int> terminated;
  std::vector<int> spawned;
};

struct FrameOutput {
  int frame = 0;
  std::vector<FrameObject> objects;  // ACTIVE tracks, ascending id
};

TrackerState init(int frame, std::span<const Detection> detections, const TrackerConfig& config);

IouMatrix compute_overlaps(const TrackerState& state, std::span<const Detection> detections);

/// A row or column is contended when two or more of its entries exceed `tau`.
/// Every above-threshold entry of a contended row or column is flagged.
Ambiguities detect_ambiguities(const IouMatrix& ious, double tau);

/// Hungarian matching on 1 - IoU over rows and columns untouched by any
/// flagged entry. Matched tracks take the detection into their history.
StageMatches basic_associate(TrackerState& state, int frame, std::span<const Detection> detections,
                             const IouMatrix& ious, const Ambiguities& ambiguities,
                             const TrackerConfig& config);

/// Resolves the contended block with score alpha * box IoU + (1 - alpha) *
/// entity IoU. Pairs without a resolvable mask on either side fall back to
/// box IoU and log a warning.
StageMatches interaction_associate(TrackerState& state, int frame,
                                   std::span<const Detection> detections, const IouMatrix& ious,
                                   const Ambiguities& ambiguities, const MaskSource* masks,
                                   const TrackerConfig& config);

/// Lifecycle update after both association stages: buffers or terminates
/// unmatched tracks, lets buffered tracks reclaim nearby free detections
/// (filling the gap by interpolation), expires the buffer, and spawns new
/// identities in OPEN mode. `claimed[d]` marks detections already assigned.
RefindOutcome refind_update(TrackerState& state, int frame, std::span<const Detection> detections,
                            std::vector<char>& claimed, const std::set<int>& matched_ids,
                            const TrackerConfig& config);

/// Runs one frame through every stage. The first call on a state that has not
/// seen a frame initializes it. Throws std::invalid_argument when frames do
/// not strictly increase or a detection carries a different frame index.
FrameOutput step(TrackerState& state, int frame, std::span<const Detection> detections,
                 const MaskSource* masks, const TrackerConfig& config);

/// Per-track frame-sorted boxes including interpolated entries.
TrajectorySet finalize(const TrackerState& state);

/// Steps every frame from the first to the last key of `detections`,
/// including frames without detections, and returns the finalized set.
TrajectorySet track_sequence(const FrameDetections& detections, const MaskSource* masks,
                             const TrackerConfig& config, TrackerState* final_state = nullptr);

}  // namespace shoal
