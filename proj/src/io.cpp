#include "shoal/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace shoal::io {

namespace fs = std::filesystem;

ParseError::ParseError(const std::string& file, std::size_t line, const std::string& reason)
    : std::runtime_error(file + ":" + std::to_string(line) + ": " + reason), file_(file), line_(line) {}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// Calls fn(line_number, line) for every non-blank line.
template <typename Fn>
void for_each_line(const std::string& text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    const std::string_view line = trim(std::string_view(text).substr(start, end - start));
    if (!line.empty()) fn(line_no, line);
    start = end + 1;
  }
}

}  // namespace

std::vector<MotRow> parse_mot(const std::string& text, const std::string& source) {
  std::vector<MotRow> rows;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    const auto fields = split(line, ',');
    if (fields.size() != 10) {
      throw ParseError(source, line_no,
                       "expected 10 comma-separated fields, found " + std::to_string(fields.size()));
    }
    MotRow row;
    row.line = line_no;
    double ignored = 0;
    static const char* names[] = {"frame", "id", "bb_left", "bb_top", "bb_width",
                                  "bb_height", "conf", "x", "y", "z"};
    bool ok = parse_number(fields[0], row.frame) && parse_number(fields[1], row.id);
    double* reals[] = {&row.left, &row.top, &row.width, &row.height, &row.conf, &ignored, &ignored, &ignored};
    for (std::size_t i = 0; ok && i < 8; ++i) {
      if (!parse_number(fields[i + 2], *reals[i])) {
        throw ParseError(source, line_no, std::string("field '") + names[i + 2] + "' is not a number");
      }
    }
    if (!ok) throw ParseError(source, line_no, "frame and id must be integers");
    if (row.frame < 1) throw ParseError(source, line_no, "frame must be >= 1");
    if (!(row.width > 0) || !(row.height > 0)) {
      throw ParseError(source, line_no, "bb_width and bb_height must be positive");
    }
    if (!std::isfinite(row.left) || !std::isfinite(row.top) || !std::isfinite(row.width) ||
        !std::isfinite(row.height) || !std::isfinite(row.conf)) {
      throw ParseError(source, line_no, "non-finite value");
    }
    rows.push_back(row);
  });
  return rows;
}

std::string format_mot_row(const MotRow& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%d,%d,%.6f,%.6f,%.6f,%.6f,%.6f,-1,-1,-1\n", r.frame, r.id, r.left,
                r.top, r.width, r.height, r.conf);
  return buf;
}

FrameDetections read_detections(const fs::path& path, ReadResult* diag) {
  const auto rows = parse_mot(read_file(path), path.string());
  FrameDetections out;
  int prev = 0;
  bool warned = false;
  for (const auto& r : rows) {
    if (r.frame < prev && !warned && diag) {
      diag->warnings.push_back(path.string() + ": frames are not in ascending order; re-sorted");
      warned = true;
    }
    prev = std::max(prev, r.frame);
    Detection d;
    d.frame = r.frame;
    d.box = BBox(r.left, r.top, r.width, r.height);
    d.confidence = r.conf;
    out[r.frame].push_back(std::move(d));
  }
  return out;
}

void write_detections(const fs::path& path, const FrameDetections& detections) {
  std::string text;
  for (const auto& [frame, dets] : detections)
    for (const auto& d : dets)
      text += format_mot_row({frame, -1, d.box.x(), d.box.y(), d.box.w(), d.box.h(), d.confidence});
  write_file(path, text);
}

TrajectorySet read_tracks(const fs::path& path, ReadResult* diag) {
  const std::string source = path.string();
  const auto rows = parse_mot(read_file(path), source);
  TrajectorySet out;
  std::set<std::pair<int, int>> seen;
  int prev = 0;
  bool warned = false;
  for (const auto& r : rows) {
    if (r.frame < prev && !warned) {
      if (diag) diag->warnings.push_back(source + ": frames are not in ascending order; re-sorted");
      warned = true;
    }
    prev = std::max(prev, r.frame);
    if (!seen.emplace(r.id, r.frame).second) {
      throw ParseError(source, r.line,
                       "id " + std::to_string(r.id) + " appears twice in frame " + std::to_string(r.frame));
    }
    out[r.id].push_back({r.frame, BBox(r.left, r.top, r.width, r.height), r.conf, r.conf == 0.0});
  }
  for (auto& [id, points] : out) {
    std::sort(points.begin(), points.end(),
              [](const TrackPoint& a, const TrackPoint& b) { return a.frame < b.frame; });
  }
  return out;
}

std::string format_tracks(const TrajectorySet& tracks) {
  std::vector<std::pair<std::pair<int, int>, MotRow>> rows;
  for (const auto& [id, points] : tracks) {
    for (const auto& p : points) {
      rows.push_back({{p.frame, id},
                      {p.frame, id, p.box.x(), p.box.y(), p.box.w(), p.box.h(),
                       p.interpolated ? 0.0 : p.confidence}});
    }
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::string text;
  for (const auto& [key, row] : rows) text += format_mot_row(row);
  return text;
}

void write_tracks(const fs::path& path, const TrajectorySet& tracks) {
  write_file(path, format_tracks(tracks));
}

std::vector<ManifestRow> read_manifest(const fs::path& path) {
  const std::string source = path.string();
  std::vector<ManifestRow> rows;
  std::set<std::pair<int, std::size_t>> keys;
  for_each_line(read_file(path), [&](std::size_t line_no, std::string_view line) {
    const auto fields = split(line, ',');
    if (fields.size() != 3) throw ParseError(source, line_no, "expected frame,det_index,path");
    ManifestRow row;
    row.line = line_no;
    if (!parse_number(fields[0], row.frame) || row.frame < 1) {
      throw ParseError(source, line_no, "frame must be a positive integer");
    }
    if (!parse_number(fields[1], row.det_index)) {
      throw ParseError(source, line_no, "det_index must be a non-negative integer");
    }
    if (fields[2].empty()) throw ParseError(source, line_no, "empty path");
    row.path = std::string(fields[2]);
    if (!keys.emplace(row.frame, row.det_index).second) {
      throw ParseError(source, line_no, "duplicate (frame, det_index)");
    }
    rows.push_back(std::move(row));
  });
  return rows;
}

void write_manifest(const fs::path& path, const std::vector<ManifestRow>& rows) {
  std::string text;
  for (const auto& r : rows) text += std::to_string(r.frame) + "," + std::to_string(r.det_index) + "," + r.path + "\n";
  write_file(path, text);
}

void attach_masks(const fs::path& manifest, FrameDetections& detections) {
  const auto rows = read_manifest(manifest);
  const fs::path base = manifest.has_parent_path() ? manifest.parent_path() : fs::path(".");
  for (const auto& r : rows) {
    const std::size_t line = r.line;
    auto it = detections.find(r.frame);
    if (it == detections.end() || r.det_index >= it->second.size()) {
      throw ParseError(manifest.string(), line,
                       "no detection " + std::to_string(r.det_index) + " in frame " + std::to_string(r.frame));
    }
    const fs::path file = base / r.path;
    if (!fs::exists(file)) throw ParseError(manifest.string(), line, "missing file " + file.string());
    it->second[r.det_index].mask_ref = file.string();
  }
}

namespace {

// Reads "P<n> <w> <h> [<maxval>]" allowing '#' comments; leaves `pos` at the
// first byte of the raster.
struct NetpbmHeader {
  int width = 0, height = 0, maxval = 1;
};

NetpbmHeader parse_header(const std::string& data, const std::string& magic, bool has_maxval,
                          std::size_t& pos, const std::string& source) {
  if (data.compare(0, 2, magic) != 0) throw ParseError(source, 1, "expected magic " + magic);
  pos = 2;
  auto next_int = [&]() {
    while (pos < data.size()) {
      if (data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(data[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
    int v = 0;
    const auto [ptr, ec] = std::from_chars(data.data() + pos, data.data() + data.size(), v);
    if (ec != std::errc()) throw ParseError(source, 1, "malformed header");
    pos = static_cast<std::size_t>(ptr - data.data());
    return v;
  };
  NetpbmHeader h;
  h.width = next_int();
  h.height = next_int();
  if (has_maxval) h.maxval = next_int();
  if (h.width <= 0 || h.height <= 0) throw ParseError(source, 1, "non-positive dimensions");
  if (pos >= data.size() || !std::isspace(static_cast<unsigned char>(data[pos]))) {
    throw ParseError(source, 1, "malformed header");
  }
  ++pos;
  return h;
}

}  // namespace

GrayCrop read_pgm(const fs::path& path, const BBox& anchor) {
  const std::string data = read_file(path);
  std::size_t pos = 0;
  const auto h = parse_header(data, "P5", true, pos, path.string());
  if (h.maxval != 255) throw ParseError(path.string(), 1, "only 8-bit PGM is supported");
  const std::size_t n = static_cast<std::size_t>(h.width) * h.height;
  if (data.size() - pos < n) throw ParseError(path.string(), 1, "truncated raster");
  std::vector<std::uint8_t> px(data.begin() + static_cast<std::ptrdiff_t>(pos),
                               data.begin() + static_cast<std::ptrdiff_t>(pos + n));
  return GrayCrop(h.width, h.height, std::move(px), anchor);
}

void write_pgm(const fs::path& path, const GrayCrop& crop) {
  std::string out = "P5\n" + std::to_string(crop.width) + " " + std::to_string(crop.height) + "\n255\n";
  out.append(crop.pixels.begin(), crop.pixels.end());
  write_file(path, out);
}

BinaryMask read_pbm(const fs::path& path, const BBox& anchor) {
  const std::string data = read_file(path);
  std::size_t pos = 0;
  const auto h = parse_header(data, "P4", false, pos, path.string());
  const std::size_t stride = (static_cast<std::size_t>(h.width) + 7) / 8;
  if (data.size() - pos < stride * h.height) throw ParseError(path.string(), 1, "truncated raster");
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(h.width) * h.height);
  for (int r = 0; r < h.height; ++r)
    for (int c = 0; c < h.width; ++c) {
      const auto byte = static_cast<std::uint8_t>(data[pos + r * stride + c / 8]);
      bits[static_cast<std::size_t>(r) * h.width + c] = (byte >> (7 - c % 8)) & 1;
    }
  return BinaryMask(h.width, h.height, std::move(bits), anchor);
}

void write_pbm(const fs::path& path, const BinaryMask& mask) {
  std::string out = "P4\n" + std::to_string(mask.width) + " " + std::to_string(mask.height) + "\n";
  const std::size_t stride = (static_cast<std::size_t>(mask.width) + 7) / 8;
  std::string raster(stride * mask.height, '\0');
  for (int r = 0; r < mask.height; ++r)
    for (int c = 0; c < mask.width; ++c)
      if (mask.at(r, c)) raster[r * stride + c / 8] |= static_cast<char>(1 << (7 - c % 8));
  write_file(path, out + raster);
}

std::optional<BinaryMask> FileMaskSource::resolve(const Detection& detection) const {
  if (!detection.mask_ref) return std::nullopt;
  const std::string& ref = *detection.mask_ref;
  std::lock_guard lock(mutex_);
  auto it = cache_.find(ref);
  if (it == cache_.end()) {
    std::optional<BinaryMask> mask;
    try {
      const auto ext = fs::path(ref).extension().string();
      if (ext == ".pgm") {
        mask = extract_entity(read_pgm(ref, detection.box), options_);
      } else if (ext == ".pbm") {
        mask = read_pbm(ref, detection.box);
      }
    } catch (const std::exception&) {
      mask.reset();
    }
    it = cache_.emplace(ref, std::move(mask)).first;
  }
  if (!it->second) return std::nullopt;
  BinaryMask m = *it->second;
  m.anchor = detection.box;
  return m;
}

}  // namespace shoal::io
