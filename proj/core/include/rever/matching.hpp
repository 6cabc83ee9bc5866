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

#ifndef REVER_MATCHING_HPP_
#define REVER_MATCHING_HPP_

#include <cstddef>
#include <vector>

namespace rever {

// Dense row-major matrix of step similarities: rows are generated steps,
// columns are ground-truth steps.
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  SimilarityMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct MatchedPair {
  std::size_t generated;
  std::size_t ground_truth;
  double weight;

  friend bool operator==(const MatchedPair&, const MatchedPair&) = default;
};

struct Matching {
  // Sorted by generated index; zero-weight pairs are omitted.
  std::vector<MatchedPair> pairs;
  // Sum of pair weights, accumulated in generated-index order.
  double total_weight = 0.0;
};

// Maximum total weight of a (not necessarily perfect) one-to-one assignment,
// via the Hungarian algorithm on the zero-padded square matrix. Weights
// must be finite and non-negative.
double max_assignment_value(const SimilarityMatrix& weights);

// Maximum-weight injective matching with deterministic tie-breaking.
//
// Among matchings within a relative 1e-9 of the optimum, returns the one
// whose in-order float sum is largest; remaining ties go to the assignment
// vector that is lexicographically smallest when every generated step prefers
// the lowest ground-truth index and "unmatched" ranks last.
Matching max_weight_matching(const SimilarityMatrix& weights);

}  // namespace rever

#endif  // REVER_MATCHING_HPP_
