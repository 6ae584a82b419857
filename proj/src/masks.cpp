#include "shoal/masks.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace shoal {

GrayCrop::GrayCrop(int width_, int height_, std::vector<std::uint8_t> pixels_, BBox anchor_)
    : width(width_), height(height_), pixels(std::move(pixels_)), anchor(anchor_) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("GrayCrop: empty crop");
  if (pixels.size() != static_cast<std::size_t>(width) * height) {
    throw std::invalid_argument("GrayCrop: pixel count does not match dimensions");
  }
}

BinaryMask::BinaryMask(int width_, int height_, std::vector<std::uint8_t> bits_, BBox anchor_)
    : width(width_), height(height_), bits(std::move(bits_)), anchor(anchor_) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("BinaryMask: empty mask");
  if (bits.size() != static_cast<std::size_t>(width) * height) {
    throw std::invalid_argument("BinaryMask: bit count does not match dimensions");
  }
  for (auto& b : bits) b = b ? 1 : 0;
}

BinaryMask BinaryMask::empty_like(int width, int height, BBox anchor) {
  return BinaryMask(width, height,
                    std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height, 0),
                    anchor);
}

std::size_t BinaryMask::foreground_count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

int BinaryMask::origin_x() const { return static_cast<int>(std::floor(anchor.x())); }
int BinaryMask::origin_y() const { return static_cast<int>(std::floor(anchor.y())); }

int otsu_level(const GrayCrop& crop) {
  if (crop.pixels.empty()) throw std::invalid_argument("otsu_level: empty crop");

  std::array<std::int64_t, 256> hist{};
  for (auto v : crop.pixels) ++hist[v];

  const auto [lo, hi] = std::minmax_element(crop.pixels.begin(), crop.pixels.end());
  if (*lo == *hi) return *lo;

  const auto total = static_cast<std::int64_t>(crop.pixels.size());
  std::int64_t total_sum = 0;
  for (int v = 0; v < 256; ++v) total_sum += hist[v] * v;

  // Cumulative integer counts keep every level's score a pure function of
  // (n0, s0), so levels with identical class splits score bit-identically.
  std::int64_t n0 = 0;
  std::int64_t s0 = 0;
  int best_level = 0;
  double best_score = -1.0;
  for (int level = 0; level < 256; ++level) {
    n0 += hist[level];
    s0 += hist[level] * level;
    const std::int64_t n1 = total - n0;
    double score = 0.0;
    if (n0 > 0 && n1 > 0) {
      const std::int64_t s1 = total_sum - s0;
      const double d = static_cast<double>(s0) * static_cast<double>(n1) -
                       static_cast<double>(s1) * static_cast<double>(n0);
      score = d * d / (static_cast<double>(n0) * static_cast<double>(n1));
    }
    if (score > best_score) {
      best_score = score;
      best_level = level;
    }
  }
  return best_level;
}

BinaryMask binarize(const GrayCrop& crop, int level, bool foreground_is_dark) {
  std::vector<std::uint8_t> bits(crop.pixels.size());
  for (std::size_t i = 0; i < crop.pixels.size(); ++i) {
    const bool dark = crop.pixels[i] <= level;
    bits[i] = (dark == foreground_is_dark) ? 1 : 0;
  }
  return BinaryMask(crop.width, crop.height, std::move(bits), crop.anchor);
}

BinaryMask largest_connected_component(const BinaryMask& mask) {
  const int w = mask.width;
  const int h = mask.height;
  std::vector<int> label(mask.bits.size(), 0);
  std::vector<int> stack;
  int best_label = 0;
  std::size_t best_size = 0;
  int next_label = 0;

  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::size_t seed = static_cast<std::size_t>(r) * w + c;
      if (!mask.bits[seed] || label[seed] != 0) continue;
      ++next_label;
      std::size_t size = 0;
      label[seed] = next_label;
      stack.assign(1, static_cast<int>(seed));
      while (!stack.empty()) {
        const int idx = stack.back();
        stack.pop_back();
        ++size;
        const int pr = idx / w;
        const int pc = idx % w;
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            const int nr = pr + dr;
            const int nc = pc + dc;
            if (nr < 0 || nr >= h || nc < 0 || nc >= w) continue;
            const std::size_t n = static_cast<std::size_t>(nr) * w + nc;
            if (mask.bits[n] && label[n] == 0) {
              label[n] = next_label;
              stack.push_back(static_cast<int>(n));
            }
          }
        }
      }
      if (size > best_size) {
        best_size = size;
        best_label = next_label;
      }
    }
  }

  BinaryMask out = BinaryMask::empty_like(w, h, mask.anchor);
  if (best_label == 0) return out;
  for (std::size_t i = 0; i < label.size(); ++i) out.bits[i] = label[i] == best_label ? 1 : 0;
  return out;
}

double entity_iou(const BinaryMask& a, const BinaryMask& b) {
  const std::size_t count_a = a.foreground_count();
  const std::size_t count_b = b.foreground_count();

  const int ax = a.origin_x(), ay = a.origin_y();
  const int bx = b.origin_x(), by = b.origin_y();
  const int x0 = std::max(ax, bx), x1 = std::min(ax + a.width, bx + b.width);
  const int y0 = std::max(ay, by), y1 = std::min(ay + a.height, by + b.height);

  std::size_t inter = 0;
  for (int gy = y0; gy < y1; ++gy) {
    for (int gx = x0; gx < x1; ++gx) {
      if (a.at(gy - ay, gx - ax) && b.at(gy - by, gx - bx)) ++inter;
    }
  }
  const std::size_t uni = count_a + count_b - inter;
  if (uni == 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

BinaryMask extract_entity(const GrayCrop& crop, const EntityOptions& options) {
  const int level = options.fixed_level ? *options.fixed_level : otsu_level(crop);
  return largest_connected_component(binarize(crop, level, options.foreground_is_dark));
}

}  // namespace shoal
