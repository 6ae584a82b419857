#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "shoal/masks.hpp"
#include "shoal/tracker.hpp"
#include "shoal/trajectory.hpp"

namespace shoal::io {

/// Malformed input. what() reads "<file>:<line>: <reason>".
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& reason);
  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

/// One line of a MOT-challenge style CSV:
/// frame,id,bb_left,bb_top,bb_width,bb_height,conf,x,y,z
struct MotRow {
  int frame = 1;
  int id = -1;
  double left = 0, top = 0, width = 1, height = 1;
  double conf = 1.0;
  std::size_t line = 0;  // source line, set by parse_mot
};

/// Parses every non-blank line of `text`. `source` names the input in errors.
std::vector<MotRow> parse_mot(const std::string& text, const std::string& source);
std::string format_mot_row(const MotRow& row);

struct ReadResult {
  std::vector<std::string> warnings;
};

FrameDetections read_detections(const std::filesystem::path& path, ReadResult* diag = nullptr);
void write_detections(const std::filesystem::path& path, const FrameDetections& detections);

/// Tracks come back with interpolated = (conf == 0). Rows whose frames go
/// backwards are accepted and re-sorted with a warning.
TrajectorySet read_tracks(const std::filesystem::path& path, ReadResult* diag = nullptr);
void write_tracks(const std::filesystem::path& path, const TrajectorySet& tracks);
std::string format_tracks(const TrajectorySet& tracks);

struct ManifestRow {
  int frame = 1;
  std::size_t det_index = 0;
  std::string path;
  std::size_t line = 0;  // source line, set by read_manifest
};

std::vector<ManifestRow> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRow>& rows);

/// Points each listed detection's mask_ref at its file (resolved against the
/// manifest's directory). Throws ParseError for duplicate keys, unknown
/// detections, or missing files.
void attach_masks(const std::filesystem::path& manifest, FrameDetections& detections);

GrayCrop read_pgm(const std::filesystem::path& path, const BBox& anchor);
void write_pgm(const std::filesystem::path& path, const GrayCrop& crop);
BinaryMask read_pbm(const std::filesystem::path& path, const BBox& anchor);
void write_pbm(const std::filesystem::path& path, const BinaryMask& mask);

/// Resolves mask_ref paths: ".pgm" crops go through extract_entity, ".pbm"
/// masks are used as-is. Both are anchored at the detection box. Results are
/// cached per path.
class FileMaskSource : public MaskSource {
 public:
  explicit FileMaskSource(EntityOptions options = {}) : options_(options) {}
  std::optional<BinaryMask> resolve(const Detection& detection) const override;

 private:
  EntityOptions options_;
  mutable std::mutex mutex_;
  mutable std::map<std::string, std::optional<BinaryMask>> cache_;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace shoal::io
