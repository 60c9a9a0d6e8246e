#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "dcsc/error.hpp"
#include "dcsc/matrix.hpp"

namespace dcsc {

struct LinearAssignment {
  std::vector<int> column_of_row;
  double total_cost = 0.0;
};

namespace detail {

struct SquareSolution {
  std::vector<int> column_of_row;
  std::vector<double> u;  // row potentials
  std::vector<double> v;  // column potentials
};

// Shortest augmenting path Hungarian method with potentials, O(n^3).
inline SquareSolution solve_square(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  SquareSolution out;
  out.column_of_row.assign(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] != 0) out.column_of_row[p[j] - 1] = j - 1;
  }
  out.u.assign(u.begin() + 1, u.end());
  out.v.assign(v.begin() + 1, v.end());
  return out;
}

}  // namespace detail

// Minimum-cost assignment of every row to a distinct column (rows <= cols).
// Among optimal assignments the lexicographically smallest column vector is
// returned: optimal assignments are exactly the perfect matchings on edges
// that are tight under the optimal potentials, so rows are fixed greedily to
// their smallest tight column that still admits a perfect matching.
inline LinearAssignment hungarian(const Matrix& cost) {
  const auto rows = cost.rows();
  const auto cols = cost.cols();
  require(rows <= cols, ErrorKind::shape_mismatch,
          "hungarian: " + std::to_string(rows) + " rows exceed " + std::to_string(cols) + " columns");
  require(cost.allFinite(), ErrorKind::numeric_overflow, "hungarian: non-finite cost");
  LinearAssignment result;
  if (rows == 0) return result;

  const int n = static_cast<int>(cols);
  Matrix square = Matrix::Zero(cols, cols);
  square.topRows(rows) = cost;
  const auto sol = detail::solve_square(square);

  const double tol = 1e-9 * (1.0 + max_abs(cost));
  auto tight = [&](int i, int j) { return square(i, j) - sol.u[i] - sol.v[j] <= tol; };

  std::vector<int> col_of(sol.column_of_row);
  std::vector<int> row_of(n, -1);
  for (int i = 0; i < n; ++i) row_of[col_of[i]] = i;
  std::vector<char> fixed_row(n, 0), fixed_col(n, 0);

  // Kuhn-style search for a path that rematches `row` while avoiding fixed
  // rows/columns and the excluded column.
  std::vector<char> seen(n, 0);
  auto augment = [&](auto&& self, int row, int target_free, int excluded) -> bool {
    for (int j = 0; j < n; ++j) {
      if (fixed_col[j] || j == excluded || seen[j] || !tight(row, j)) continue;
      seen[j] = 1;
      if (j == target_free || (row_of[j] >= 0 && self(self, row_of[j], target_free, excluded))) {
        col_of[row] = j;
        row_of[j] = row;
        return true;
      }
    }
    return false;
  };

  for (int i = 0; i < static_cast<int>(rows); ++i) {
    for (int c = 0; c < n; ++c) {
      if (fixed_col[c] || !tight(i, c)) continue;
      if (c == col_of[i]) break;
      const int freed = col_of[i];
      const int displaced = row_of[c];
      const auto saved_col = col_of;
      const auto saved_row = row_of;
      // Tentatively give c to i; the displaced row must reach the freed column.
      fixed_row[i] = 1;
      fixed_col[c] = 1;
      col_of[i] = c;
      row_of[c] = i;
      row_of[freed] = -1;
      col_of[displaced] = -1;
      std::fill(seen.begin(), seen.end(), 0);
      const bool ok = augment(augment, displaced, freed, c);
      fixed_row[i] = 0;
      fixed_col[c] = 0;
      if (ok) break;
      col_of = saved_col;
      row_of = saved_row;
    }
    fixed_row[i] = 1;
    fixed_col[col_of[i]] = 1;
  }

  result.column_of_row.assign(col_of.begin(), col_of.begin() + rows);
  for (Eigen::Index i = 0; i < rows; ++i) result.total_cost += cost(i, result.column_of_row[i]);
  return result;
}

}  // namespace dcsc
