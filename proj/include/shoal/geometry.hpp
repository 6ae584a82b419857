#pragma once

#include <vector>

namespace shoal {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Axis-aligned rectangle in continuous pixel coordinates.
///
/// (x, y) is the top-left corner. Width and height must be strictly positive;
/// the constructor throws std::invalid_argument otherwise, so every BBox that
/// exists has a positive area.
class BBox {
 public:
  BBox(double x, double y, double w, double h);

  double x() const { return x_; }
  double y() const { return y_; }
  double w() const { return w_; }
  double h() const { return h_; }
  double right() const { return x_ + w_; }
  double bottom() const { return y_ + h_; }
  double area() const { return w_ * h_; }

  friend bool operator==(const BBox&, const BBox&) = default;

 private:
  double x_;
  double y_;
  double w_;
  double h_;
};

/// Area of intersection over area of union. Edge- or corner-touching boxes
/// have zero intersection and therefore IoU 0.
double iou(const BBox& a, const BBox& b);

double intersection_area(const BBox& a, const BBox& b);

Point center(const BBox& b);

/// Closed-interval membership: points on the boundary are inside.
bool contains(const BBox& region, Point p);

/// Search region of size 2k*w x 2k*h sharing the center of `box`.
/// Throws std::invalid_argument for k < 1.
BBox buffer_region(const BBox& box, int k);

/// `n_missing` boxes strictly between `start` and `end`, each coordinate
/// linear in the step index. Endpoints are not included.
std::vector<BBox> interpolate_boxes(const BBox& start, const BBox& end, int n_missing);

}  // namespace shoal
