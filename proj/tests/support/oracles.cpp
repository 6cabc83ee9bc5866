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

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace rever::testing {

double permutation_max_matching(const SimilarityMatrix& w) {
  const std::size_t n = std::max(w.rows(), w.cols());
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = 0.0;
  do {
    double sum = 0.0;
    for (std::size_t r = 0; r < w.rows(); ++r) {
      if (perm[r] < w.cols()) sum += w(r, perm[r]);
    }
    best = std::max(best, sum);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

Moments moments(std::span<const double> xs) {
  Moments m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<long double>(xs.size());
  long double var = 0;
  for (double x : xs) var += (x - m.mean) * (x - m.mean);
  m.popstd = std::sqrt(var / static_cast<long double>(xs.size()));
  return m;
}

const std::vector<std::string>& tricky_arguments() {
  static const std::vector<std::string> kArgs = {
      "apple", "red apple", "cup",  "teacup", "mug", "basket", "hamper",
      "tray",  "tea tray",  "box",  "carton", "pen", "marker", "lid"};
  return kArgs;
}

Plan random_plan(Rng& rng, const SkillGrammar& grammar, std::size_t length,
                 std::span<const std::string> arguments) {
  Plan plan;
  for (std::size_t i = 0; i < length; ++i) {
    const std::size_t id = rng.below(grammar.size());
    std::vector<std::string> args;
    for (std::size_t s = 0; s < grammar.at(id).slots().size(); ++s) {
      args.push_back(arguments[rng.below(arguments.size())]);
    }
    plan.steps.push_back(grammar.make_step(id, std::move(args)));
  }
  return plan;
}

std::string renumber(std::string_view answer) {
  std::istringstream in{std::string(answer)};
  std::string line, out;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    const auto dot = line.find('.');
    if (!out.empty()) out += '\n';
    out += std::to_string(++n) + line.substr(dot);
  }
  return out;
}

}  // namespace rever::testing
