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

#ifndef REVER_TRAINER_HPP_
#define REVER_TRAINER_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rever/grammar.hpp"
#include "rever/grpo.hpp"
#include "rever/datagen.hpp"
#include "rever/reward.hpp"
#include "rever/toy_policy.hpp"

namespace rever {

struct ToyTask {
  std::string prompt;
  Plan ground_truth;
};

// Planning prompt and ground-truth plan of each synthesized task.
std::vector<ToyTask> make_toy_tasks(std::span<const TaskSpec> tasks,
                                    const SkillGrammar& grammar);

struct SlotFillers {
  std::vector<std::string> objects;
  std::vector<std::string> locations;
};

// Distinct slot arguments of `steps` by slot kind, in first-seen order.
SlotFillers slot_fillers(std::span<const PlanStep> steps, const SkillGrammar& grammar);

// Candidate steps for the toy policy: every distinct ground-truth step first,
// then grammar x pool instantiations (objects fill [object], locations fill
// [location]) until `max_size`. A filler whose step similarity to an earlier
// candidate is 1 is skipped, since the reward could not tell them apart.
// Throws if the ground truth alone exceeds `max_size`.
std::vector<PlanStep> candidate_vocabulary(
    std::span<const ToyTask> tasks, const SkillGrammar& grammar,
    const Ontology& ontology, const RewardWeights& weights,
    std::span<const std::string> objects, std::span<const std::string> locations,
    std::size_t max_size);

// A fixed set of sampled choice sequences with their advantages and
// behaviour log-probabilities; the inputs of one objective evaluation.
struct ToyGroup {
  std::vector<std::vector<std::size_t>> choices;
  std::vector<double> advantages;
  std::vector<double> logp_old;
};

// GRPO objective evaluated at the policy's current logits.
ObjectiveTerms toy_objective(const ToyPlanPolicy& policy, const ToyGroup& group,
                             const GrpoConfig& cfg);

// Closed-form d(objective)/d(logits), laid out like logit_table().
std::vector<double> toy_objective_gradient(const ToyPlanPolicy& policy,
                                           const ToyGroup& group,
                                           const GrpoConfig& cfg);

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::vector<double> analytic;
  std::vector<double> numeric;
};

// Central finite differences (h = 1e-5) on every logit against the analytic
// gradient. Relative error uses max(|a|, |n|, 1e-8) as denominator.
GradientCheckResult gradient_check(const ToyPlanPolicy& policy,
                                   const ToyGroup& group,
                                   const GrpoConfig& cfg);

// Averages over every group sampled in the step.
struct TrainStepRecord {
  std::size_t step = 0;
  std::size_t first_task = 0;
  std::size_t tasks = 0;
  double mean_reward = 0.0;
  double mean_abs_advantage = 0.0;
  double kl = 0.0;
  double clip_fraction = 0.0;
  double loss = 0.0;
};

struct TaskOutcome {
  std::size_t task = 0;
  Plan greedy_plan;
  double greedy_reward = 0.0;
  // Same steps in the same order as the ground truth.
  bool exact_match = false;
  // Same multiset of steps; the reward cannot see step order.
  bool unordered_match = false;
};

struct TrainReport {
  std::vector<TrainStepRecord> steps;
  std::vector<TaskOutcome> outcomes;
  // Mean over tasks of each task's first / most recent group mean reward.
  double initial_mean_reward = 0.0;
  double final_mean_reward = 0.0;
  std::size_t unordered_matches = 0;
  std::size_t exact_matches = 0;
  // Final per-task policies.
  std::vector<ToyPlanPolicy> policies;
};

// GRPO over the tasks, one tabular policy per task, all sharing
// `vocabulary`. Each step samples one group for each of `prompts_per_step`
// tasks (round-robin) and takes a gradient step on each. Every rollout is scored through total_reward on its rendered
// response text.
TrainReport train_toy(std::span<const ToyTask> tasks,
                      std::span<const PlanStep> vocabulary,
                      const GrpoConfig& cfg, const SkillGrammar& grammar,
                      const Ontology& ontology, const RewardWeights& weights);

}  // namespace rever

#endif  // REVER_TRAINER_HPP_
