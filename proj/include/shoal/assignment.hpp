#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "shoal/geometry.hpp"

namespace shoal {

/// Dense rows x cols matrix of non-negative costs. Entries equal to
/// kForbidden can never be part of a returned matching.
class CostMatrix {
 public:
  static constexpr double kForbidden = std::numeric_limits<double>::infinity();

  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, double fill = kForbidden)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  bool forbidden(std::size_t r, std::size_t c) const { return (*this)(r, c) == kForbidden; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct Matching {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // sorted by row
  std::vector<std::size_t> unmatched_rows;
  std::vector<std::size_t> unmatched_cols;

  double total_cost(const CostMatrix& costs) const;
  friend bool operator==(const Matching&, const Matching&) = default;
};

/// Optimal assignment. Among all matchings that avoid forbidden entries, picks
/// the maximum cardinality ones, then the minimum total cost, then the
/// lexicographically smallest pair list (by row, then column). Throws
/// std::invalid_argument on negative or NaN costs.
Matching solve(const CostMatrix& costs);

/// cost(r, c) = 1 - iou(prev[r], cur[c]) when the IoU reaches `gate`,
/// forbidden otherwise.
CostMatrix iou_cost_matrix(std::span<const BBox> prev, std::span<const BBox> cur, double gate);

}  // namespace shoal
