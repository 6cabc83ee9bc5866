// Copyright 2026 The Rever Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rever/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rever {
namespace {

constexpr std::size_t kNodeBudget = 200000;
constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

// O(n^3) shortest-augmenting-path Hungarian method on a square cost matrix
// (minimization). Returns the optimal cost.
double hungarian_min_cost(const std::vector<double>& cost, std::size_t n) {
  if (n == 0) return 0.0;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
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
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (std::size_t j = 1; j <= n; ++j) total += cost[(p[j] - 1) * n + (j - 1)];
  return total;
}

// Max assignment over rows [first_row, rows) and the columns not yet taken.
double residual_value(const SimilarityMatrix& w, std::size_t first_row,
                      const std::vector<char>& col_taken) {
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < w.cols(); ++c) {
    if (!col_taken[c]) cols.push_back(c);
  }
  const std::size_t rows = w.rows() - first_row;
  const std::size_t n = std::max(rows, cols.size());
  if (rows == 0 || cols.empty()) return 0.0;
  std::vector<double> cost(n * n, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      cost[r * n + c] = -w(first_row + r, cols[c]);
    }
  }
  return -hungarian_min_cost(cost, n);
}

class TieBreakSearch {
 public:
  TieBreakSearch(const SimilarityMatrix& w, double optimum)
      : w_(w),
        threshold_(optimum - 1e-9 * (1.0 + std::abs(optimum))),
        assignment_(w.rows(), kNone),
        col_taken_(w.cols(), 0) {}

  std::vector<std::size_t> run() {
    visit(0, 0.0);
    return best_;
  }

 private:
  void visit(std::size_t row, double partial) {
    if (++nodes_ > kNodeBudget && found_) return;
    if (row == w_.rows()) {
      if (!found_ || partial > best_sum_) {
        found_ = true;
        best_sum_ = partial;
        best_ = assignment_;
      }
      return;
    }
    for (std::size_t c = 0; c < w_.cols(); ++c) {
      const double weight = w_(row, c);
      if (col_taken_[c] || weight <= 0.0) continue;
      col_taken_[c] = 1;
      const double next = partial + weight;
      if (next + residual_value(w_, row + 1, col_taken_) >= threshold_) {
        assignment_[row] = c;
        visit(row + 1, next);
        assignment_[row] = kNone;
      }
      col_taken_[c] = 0;
      if (nodes_ > kNodeBudget && found_) return;
    }
    if (partial + residual_value(w_, row + 1, col_taken_) >= threshold_) {
      visit(row + 1, partial);
    }
  }

  const SimilarityMatrix& w_;
  double threshold_;
  std::vector<std::size_t> assignment_;
  std::vector<char> col_taken_;
  std::vector<std::size_t> best_;
  double best_sum_ = 0.0;
  bool found_ = false;
  std::size_t nodes_ = 0;
};

void check_weights(const SimilarityMatrix& w) {
  for (std::size_t r = 0; r < w.rows(); ++r) {
    for (std::size_t c = 0; c < w.cols(); ++c) {
      if (!std::isfinite(w(r, c)) || w(r, c) < 0.0) {
        throw std::invalid_argument("similarity weights must be finite and >= 0");
      }
    }
  }
}

}  // namespace

double max_assignment_value(const SimilarityMatrix& weights) {
  check_weights(weights);
  return residual_value(weights, 0, std::vector<char>(weights.cols(), 0));
}

Matching max_weight_matching(const SimilarityMatrix& weights) {
  Matching matching;
  if (weights.rows() == 0 || weights.cols() == 0) return matching;
  const double optimum = max_assignment_value(weights);
  const std::vector<std::size_t> assignment =
      TieBreakSearch(weights, optimum).run();
  for (std::size_t r = 0; r < assignment.size(); ++r) {
    if (assignment[r] == kNone) continue;
    const double weight = weights(r, assignment[r]);
    matching.pairs.push_back({r, assignment[r], weight});
    matching.total_weight += weight;
  }
  return matching;
}

}  // namespace rever
