#include "shoal/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace shoal {

double Matching::total_cost(const CostMatrix& costs) const {
  double sum = 0.0;
  for (const auto& [r, c] : pairs) sum += costs(r, c);
  return sum;
}

namespace {

// Square min-cost assignment with dual potentials (shortest augmenting path
// form of the Hungarian method). All entries must be finite.
struct Hungarian {
  std::size_t n;
  const std::vector<double>& a;  // n x n, row-major
  std::vector<double> u, v;
  std::vector<std::size_t> row_of_col;  // 1-based row owning each 1-based col, 0 = free

  Hungarian(std::size_t n_, const std::vector<double>& a_)
      : n(n_), a(a_), u(n_ + 1, 0.0), v(n_ + 1, 0.0), row_of_col(n_ + 1, 0) {}

  double cost(std::size_t i, std::size_t j) const { return a[(i - 1) * n + (j - 1)]; }

  void run() {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> minv(n + 1);
    std::vector<std::size_t> way(n + 1);
    std::vector<char> used(n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
      row_of_col[0] = i;
      std::size_t j0 = 0;
      std::fill(minv.begin(), minv.end(), inf);
      std::fill(used.begin(), used.end(), 0);
      do {
        used[j0] = 1;
        const std::size_t i0 = row_of_col[j0];
        double delta = inf;
        std::size_t j1 = 0;
        for (std::size_t j = 1; j <= n; ++j) {
          if (used[j]) continue;
          const double cur = cost(i0, j) - u[i0] - v[j];
          if (cur < minv[j]) {
            minv[j] = cur;
            way[j] = j0;
          }
          if (minv[j] < delta) {
            delta = minv[j];
            j1 = j;
          }
        }
        for (std::size_t j = 0; j <= n; ++j) {
          if (used[j]) {
            u[row_of_col[j]] += delta;
            v[j] -= delta;
          } else {
            minv[j] -= delta;
          }
        }
        j0 = j1;
      } while (row_of_col[j0] != 0);
      do {
        const std::size_t j1 = way[j0];
        row_of_col[j0] = row_of_col[j1];
        j0 = j1;
      } while (j0 != 0);
    }
  }
};

// Walks the equality subgraph of an optimal dual solution. Every perfect
// matching inside it is optimal, so lexicographic refinement only needs
// alternating-cycle searches there.
class TightRefiner {
 public:
  TightRefiner(std::size_t n, std::size_t rows, std::size_t cols, const CostMatrix& costs,
               std::vector<char> tight, std::vector<std::size_t> col_of_row)
      : n_(n), rows_(rows), cols_(cols), costs_(costs), tight_(std::move(tight)),
        col_of_row_(std::move(col_of_row)), row_of_col_(n, 0), state_(n, kFree) {
    for (std::size_t r = 0; r < n_; ++r) row_of_col_[col_of_row_[r]] = r;
  }

  std::vector<std::size_t> refine() {
    for (std::size_t r = 0; r < rows_; ++r) {
      bool placed = false;
      for (std::size_t c = 0; c < cols_ && !placed; ++c) {
        if (!real_pair(r, c) || !is_tight(r, c)) continue;
        if (col_of_row_[r] == c) {
          placed = true;
          break;
        }
        placed = try_move(r, c);
      }
      state_[r] = placed ? kFixed : kFixedUnmatched;
    }
    return col_of_row_;
  }

 private:
  enum State : char { kFree, kFixed, kFixedUnmatched };

  bool real_pair(std::size_t r, std::size_t c) const {
    return r < rows_ && c < cols_ && !costs_.forbidden(r, c);
  }
  bool is_tight(std::size_t r, std::size_t c) const { return tight_[r * n_ + c] != 0; }

  bool may_take(std::size_t r, std::size_t c) const {
    if (!is_tight(r, c)) return false;
    switch (state_[r]) {
      case kFixed: return false;
      case kFixedUnmatched: return !real_pair(r, c);
      default: return true;
    }
  }

  // Reassign `row` to `col`, rerouting the displaced owner until the column
  // `row` gives up is reclaimed.
  bool try_move(std::size_t row, std::size_t col) {
    const std::size_t freed = col_of_row_[row];
    std::vector<char> visited(n_, 0);
    visited[col] = 1;
    visited[freed] = 1;
    std::vector<std::pair<std::size_t, std::size_t>> path;  // (row, new col)
    path.emplace_back(row, col);
    if (!reroute(row_of_col_[col], freed, visited, path)) return false;
    for (const auto& [r, c] : path) {
      col_of_row_[r] = c;
      row_of_col_[c] = r;
    }
    return true;
  }

  bool reroute(std::size_t row, std::size_t target, std::vector<char>& visited,
               std::vector<std::pair<std::size_t, std::size_t>>& path) {
    if (state_[row] == kFixed) return false;
    if (may_take(row, target)) {
      path.emplace_back(row, target);
      return true;
    }
    for (std::size_t c = 0; c < n_; ++c) {
      if (visited[c] || !may_take(row, c)) continue;
      visited[c] = 1;
      path.emplace_back(row, c);
      if (reroute(row_of_col_[c], target, visited, path)) return true;
      path.pop_back();
    }
    return false;
  }

  std::size_t n_, rows_, cols_;
  const CostMatrix& costs_;
  std::vector<char> tight_;
  std::vector<std::size_t> col_of_row_;
  std::vector<std::size_t> row_of_col_;
  std::vector<State> state_;
};

}  // namespace

Matching solve(const CostMatrix& costs) {
  const std::size_t rows = costs.rows();
  const std::size_t cols = costs.cols();
  Matching result;

  double max_cost = 0.0;
  bool any_feasible = false;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double x = costs(r, c);
      if (std::isnan(x) || x < 0.0) throw std::invalid_argument("solve: costs must be >= 0");
      if (x == CostMatrix::kForbidden) continue;
      if (!std::isfinite(x)) throw std::invalid_argument("solve: non-finite cost");
      any_feasible = true;
      max_cost = std::max(max_cost, x);
    }
  }

  std::vector<std::size_t> col_of_row;
  if (any_feasible) {
    const std::size_t n = std::max(rows, cols);
    // Any matching with one more feasible pair is cheaper than every matching
    // with fewer, so cardinality is maximized before cost.
    const double big = static_cast<double>(n) * max_cost + 1.0;
    std::vector<double> a(n * n, big);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c)
        if (!costs.forbidden(r, c)) a[r * n + c] = costs(r, c);

    Hungarian h(n, a);
    h.run();

    col_of_row.assign(n, 0);
    for (std::size_t j = 1; j <= n; ++j) col_of_row[h.row_of_col[j] - 1] = j - 1;

    const double eps = 1e-9 * std::max(1.0, big);
    std::vector<char> tight(n * n, 0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        tight[i * n + j] = (a[i * n + j] - h.u[i + 1] - h.v[j + 1]) <= eps ? 1 : 0;
    for (std::size_t i = 0; i < n; ++i) tight[i * n + col_of_row[i]] = 1;

    col_of_row = TightRefiner(n, rows, cols, costs, std::move(tight), std::move(col_of_row)).refine();
  }

  std::vector<char> col_used(cols, 0);
  for (std::size_t r = 0; r < rows; ++r) {
    if (any_feasible) {
      const std::size_t c = col_of_row[r];
      if (c < cols && !costs.forbidden(r, c)) {
        result.pairs.emplace_back(r, c);
        col_used[c] = 1;
        continue;
      }
    }
    result.unmatched_rows.push_back(r);
  }
  for (std::size_t c = 0; c < cols; ++c)
    if (!col_used[c]) result.unmatched_cols.push_back(c);
  return result;
}

CostMatrix iou_cost_matrix(std::span<const BBox> prev, std::span<const BBox> cur, double gate) {
  if (!(gate >= 0.0 && gate <= 1.0)) throw std::invalid_argument("iou_cost_matrix: gate outside [0,1]");
  CostMatrix m(prev.size(), cur.size());
  for (std::size_t r = 0; r < prev.size(); ++r) {
    for (std::size_t c = 0; c < cur.size(); ++c) {
      const double v = iou(prev[r], cur[c]);
      if (v >= gate) m(r, c) = 1.0 - v;
    }
  }
  return m;
}

}  // namespace shoal
