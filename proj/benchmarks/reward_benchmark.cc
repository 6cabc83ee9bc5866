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

#include <string>

#include <benchmark/benchmark.h>

#include "rever/grammar.hpp"
#include "rever/reward.hpp"

namespace rever {
namespace {

Plan make_plan(const SkillGrammar& g, std::initializer_list<std::string_view> steps) {
  Plan p;
  for (std::string_view s : steps) p.steps.push_back(*parse_step(s, g));
  return p;
}

void BM_ParsePlan(benchmark::State& state) {
  const SkillGrammar g = SkillGrammar::default_grammar();
  const std::string text = g.render_plan(make_plan(
      g, {"Pick up teapot.", "Pour into teacup.", "Put lid on teacup.", "Put teacup on tray."}));
  for (auto _ : state) benchmark::DoNotOptimize(parse_plan(text, g));
}
BENCHMARK(BM_ParsePlan);

void BM_TotalReward(benchmark::State& state) {
  const SkillGrammar g = SkillGrammar::default_grammar();
  const Ontology o = Ontology::default_ontology();
  const RewardWeights w;
  const Plan truth = make_plan(g, {"Pick up apple.", "Place into basket.", "Put pen into box.",
                                   "Put tape into box."});
  const Plan guess = make_plan(g, {"Put tape into box.", "Pick up orange.",
                                   "Place into basket.", "Put pen into drawer."});
  const std::string response =
      "<think>Sort the items.</think><answer>" + g.render_plan(guess) + "</answer>";
  for (auto _ : state) benchmark::DoNotOptimize(total_reward(response, truth, g, o, w));
}
BENCHMARK(BM_TotalReward);

}  // namespace
}  // namespace rever
