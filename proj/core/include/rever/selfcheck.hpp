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

#ifndef REVER_SELFCHECK_HPP_
#define REVER_SELFCHECK_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rever/grpo.hpp"
#include "rever/matching.hpp"
#include "rever/random.hpp"
#include "rever/trainer.hpp"

namespace rever {

using MatchingSolver = std::function<Matching(const SimilarityMatrix&)>;

// Exhaustive maximum over all injective partial matchings, summing each
// candidate in generated-index order. Exponential; meant for n <= 8.
double brute_force_matching_value(const SimilarityMatrix& weights);

struct SuiteResult {
  std::string name;
  bool passed = true;
  std::size_t cases = 0;
  std::string counterexample;  // first failure, empty when passed
};

struct SelfcheckReport {
  std::vector<SuiteResult> suites;
  bool passed() const;
};

// Random matrices up to 7x7, half drawn from the reward's discrete weight
// levels (to exercise ties), half uniform in [0, 1].
SuiteResult check_matching_oracle(std::uint64_t seed, const MatchingSolver& solver,
                                  std::size_t cases = 500);

// A random toy policy and sampled group with old log-probabilities placed
// at least `margin` away from the clip boundaries.
struct GradientCase {
  ToyPlanPolicy policy;
  ToyGroup group;
  GrpoConfig config;
};
GradientCase random_gradient_case(Rng& rng, double kl_weight,
                                  bool ratios_inside_clip = false,
                                  double margin = 1e-3);

SuiteResult check_gradients(std::uint64_t seed, std::size_t cases = 50,
                            double tolerance = 1e-5);

// Render -> parse identity for random plans over the default grammar.
SuiteResult check_grammar_round_trip(std::uint64_t seed, std::size_t cases = 500);

SelfcheckReport run_selfcheck(std::uint64_t seed, const MatchingSolver& solver);

}  // namespace rever

#endif  // REVER_SELFCHECK_HPP_
