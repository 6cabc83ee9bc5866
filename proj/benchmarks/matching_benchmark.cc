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

#include <benchmark/benchmark.h>

#include "rever/matching.hpp"
#include "rever/random.hpp"

namespace rever {
namespace {

SimilarityMatrix random_matrix(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  SimilarityMatrix m(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      m(r, c) = rng.below(3) == 0 ? 0.0 : 0.05 * static_cast<double>(rng.below(21));
    }
  }
  return m;
}

void BM_MaxAssignmentValue(benchmark::State& state) {
  const SimilarityMatrix m = random_matrix(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(max_assignment_value(m));
}
BENCHMARK(BM_MaxAssignmentValue)->Arg(2)->Arg(4)->Arg(6)->Arg(8)->Arg(16);

void BM_MaxWeightMatching(benchmark::State& state) {
  const SimilarityMatrix m = random_matrix(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(max_weight_matching(m));
}
BENCHMARK(BM_MaxWeightMatching)->Arg(2)->Arg(4)->Arg(6)->Arg(8);

}  // namespace
}  // namespace rever
