#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "shoal/geometry.hpp"

namespace shoal {

/// 8-bit grayscale image cut out of a frame at `anchor`.
struct GrayCrop {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major
  BBox anchor{0, 0, 1, 1};

  GrayCrop() = default;
  GrayCrop(int width, int height, std::vector<std::uint8_t> pixels, BBox anchor);

  std::uint8_t at(int row, int col) const {
    return pixels[static_cast<std::size_t>(row) * width + col];
  }
};

/// Foreground bitmap placed in global image coordinates through its anchor.
/// Pixel (r, c) occupies global cell (floor(anchor.y) + r, floor(anchor.x) + c).
struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;  // row-major, 0 or 1
  BBox anchor{0, 0, 1, 1};

  BinaryMask() = default;
  BinaryMask(int width, int height, std::vector<std::uint8_t> bits, BBox anchor);
  static BinaryMask empty_like(int width, int height, BBox anchor);

  bool at(int row, int col) const {
    return bits[static_cast<std::size_t>(row) * width + col] != 0;
  }
  std::size_t foreground_count() const;
  int origin_x() const;
  int origin_y() const;
};

/// Otsu threshold: the level L maximizing between-class variance when the
/// classes are {v <= L} and {v > L}. Ties go to the lowest level. A crop of
/// constant intensity v returns v.
int otsu_level(const GrayCrop& crop);

/// Pixels <= level are foreground when `foreground_is_dark`, pixels > level
/// otherwise.
BinaryMask binarize(const GrayCrop& crop, int level, bool foreground_is_dark);

/// Keeps the 8-connected foreground component with the most pixels. Equal
/// sizes resolve to the component whose first pixel in row-major order comes
/// first.
BinaryMask largest_connected_component(const BinaryMask& mask);

/// Pixel IoU of the two foregrounds in global coordinates; 0 when both are
/// empty.
double entity_iou(const BinaryMask& a, const BinaryMask& b);

struct EntityOptions {
  bool foreground_is_dark = true;
  std::optional<int> fixed_level;  // overrides Otsu when set
};

/// Binarize then keep the largest connected component.
BinaryMask extract_entity(const GrayCrop& crop, const EntityOptions& options = {});

}  // namespace shoal
