#include "shoal/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace shoal {

BBox::BBox(double x, double y, double w, double h) : x_(x), y_(y), w_(w), h_(h) {
  if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(w) || !std::isfinite(h)) {
    throw std::invalid_argument("BBox: non-finite coordinate");
  }
  if (!(w > 0.0) || !(h > 0.0)) {
    throw std::invalid_argument("BBox: width and height must be positive (got " +
                                std::to_string(w) + " x " + std::to_string(h) + ")");
  }
}

double intersection_area(const BBox& a, const BBox& b) {
  const double iw = std::min(a.right(), b.right()) - std::max(a.x(), b.x());
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.y(), b.y());
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  return iw * ih;
}

double iou(const BBox& a, const BBox& b) {
  const double inter = intersection_area(a, b);
  if (inter == 0.0) return 0.0;
  // Areas from the same edge differences as the intersection, so iou(a, a)
  // is exactly 1.
  const double area_a = (a.right() - a.x()) * (a.bottom() - a.y());
  const double area_b = (b.right() - b.x()) * (b.bottom() - b.y());
  const double uni = area_a + area_b - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

Point center(const BBox& b) { return {b.x() + b.w() / 2.0, b.y() + b.h() / 2.0}; }

bool contains(const BBox& region, Point p) {
  return p.x >= region.x() && p.x <= region.right() && p.y >= region.y() &&
         p.y <= region.bottom();
}

BBox buffer_region(const BBox& box, int k) {
  if (k < 1) throw std::invalid_argument("buffer_region: k must be >= 1");
  const Point c = center(box);
  const double half_w = k * box.w();
  const double half_h = k * box.h();
  return BBox(c.x - half_w, c.y - half_h, 2.0 * half_w, 2.0 * half_h);
}

std::vector<BBox> interpolate_boxes(const BBox& start, const BBox& end, int n_missing) {
  std::vector<BBox> out;
  if (n_missing < 1) return out;
  out.reserve(static_cast<std::size_t>(n_missing));
  const double denom = static_cast<double>(n_missing + 1);
  for (int i = 1; i <= n_missing; ++i) {
    const double t = i / denom;
    out.emplace_back(start.x() + (end.x() - start.x()) * t,
                     start.y() + (end.y() - start.y()) * t,
                     start.w() + (end.w() - start.w()) * t,
                     start.h() + (end.h() - start.h()) * t);
  }
  return out;
}

}  // namespace shoal
