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

#include "rever/datagen.hpp"
#include "rever/trainer.hpp"

namespace rever {
namespace {

void BM_TrainToySteps(benchmark::State& state) {
  const SkillGrammar g = SkillGrammar::default_grammar();
  const Ontology o = Ontology::default_ontology();
  const RewardWeights w;
  const auto library = default_library(g);
  SynthesisConfig synth;
  synth.count = 20;
  synth.seed = 7;
  const auto tasks = make_toy_tasks(
      synthesize_tasks(library, synth, InstructionPool::default_pool(),
                       ConstraintTable::default_table(g), g),
      g);
  std::vector<PlanStep> known;
  for (const SkillDemo& d : library) known.push_back(d.step);
  const SlotFillers f = slot_fillers(known, g);
  const auto vocabulary =
      candidate_vocabulary(tasks, g, o, w, f.objects, f.locations, 40);
  GrpoConfig cfg;
  cfg.steps = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(train_toy(tasks, vocabulary, cfg, g, o, w));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainToySteps)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace rever

BENCHMARK_MAIN();
