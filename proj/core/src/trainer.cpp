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

#include "rever/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rever {
namespace {

struct AdamState {
  std::vector<double> m, v;
  std::size_t t = 0;
};

// Gradient ascent on the objective.
void apply_update(std::span<double> table, std::vector<double>& grad,
                  const GrpoConfig& cfg, AdamState& state) {
  if (cfg.max_grad_norm > 0.0) {
    double norm = 0.0;
    for (double g : grad) norm += g * g;
    norm = std::sqrt(norm);
    if (norm > cfg.max_grad_norm) {
      for (double& g : grad) g *= cfg.max_grad_norm / norm;
    }
  }
  if (cfg.optimizer == GrpoConfig::Optimizer::kSgd) {
    for (std::size_t k = 0; k < table.size(); ++k) table[k] += cfg.learning_rate * grad[k];
    return;
  }
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  if (state.m.empty()) {
    state.m.assign(table.size(), 0.0);
    state.v.assign(table.size(), 0.0);
  }
  ++state.t;
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(state.t));
  for (std::size_t k = 0; k < table.size(); ++k) {
    state.m[k] = kBeta1 * state.m[k] + (1.0 - kBeta1) * grad[k];
    state.v[k] = kBeta2 * state.v[k] + (1.0 - kBeta2) * grad[k] * grad[k];
    table[k] += cfg.learning_rate * (state.m[k] / c1) / (std::sqrt(state.v[k] / c2) + kEps);
  }
}

GrpoGroup evaluate_group(const ToyPlanPolicy& policy, const ToyGroup& group) {
  GrpoGroup g;
  g.advantages = group.advantages;
  g.logp_old = group.logp_old;
  for (const auto& choices : group.choices) {
    g.logp_new.push_back(policy.log_prob(choices));
    g.logp_ref.push_back(policy.reference_log_prob(choices));
  }
  return g;
}

bool same_multiset(const Plan& a, const Plan& b) {
  if (a.size() != b.size()) return false;
  std::vector<char> used(b.size(), 0);
  for (const PlanStep& step : a.steps) {
    bool found = false;
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (!used[j] && b.steps[j] == step) {
        used[j] = 1;
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

}  // namespace

std::vector<ToyTask> make_toy_tasks(std::span<const TaskSpec> tasks,
                                    const SkillGrammar& grammar) {
  std::vector<ToyTask> out;
  out.reserve(tasks.size());
  for (const TaskSpec& task : tasks) {
    out.push_back(ToyTask{render_prompt(PromptKind::kPlanning, grammar, task.instruction),
                          task.plan()});
  }
  return out;
}

SlotFillers slot_fillers(std::span<const PlanStep> steps, const SkillGrammar& grammar) {
  SlotFillers fillers;
  for (const PlanStep& step : steps) {
    const auto& slots = grammar.at(step.template_id).slots();
    for (std::size_t i = 0; i < slots.size() && i < step.args.size(); ++i) {
      auto& list = slots[i] == SlotKind::kObject ? fillers.objects : fillers.locations;
      if (std::find(list.begin(), list.end(), step.args[i]) == list.end()) {
        list.push_back(step.args[i]);
      }
    }
  }
  return fillers;
}

std::vector<PlanStep> candidate_vocabulary(
    std::span<const ToyTask> tasks, const SkillGrammar& grammar,
    const Ontology& ontology, const RewardWeights& weights,
    std::span<const std::string> objects, std::span<const std::string> locations,
    std::size_t max_size) {
  std::vector<PlanStep> vocabulary;
  auto add = [&](const PlanStep& step) {
    if (std::find(vocabulary.begin(), vocabulary.end(), step) == vocabulary.end()) {
      vocabulary.push_back(step);
    }
  };
  for (const ToyTask& task : tasks) {
    for (const PlanStep& step : task.ground_truth.steps) add(step);
  }
  if (vocabulary.size() > max_size) {
    throw std::invalid_argument("ground-truth steps exceed vocabulary size " +
                                std::to_string(max_size));
  }
  for (std::size_t id = 0; id < grammar.size(); ++id) {
    const auto& slots = grammar.at(id).slots();
    std::vector<std::string> args;
    auto fill = [&](auto&& self, std::size_t slot) -> void {
      if (vocabulary.size() >= max_size) return;
      if (slot == slots.size()) {
        PlanStep step = grammar.make_step(id, args);
        const bool indistinct =
            std::any_of(vocabulary.begin(), vocabulary.end(), [&](const PlanStep& v) {
              return step_similarity(step, v, grammar, ontology, weights) >= 1.0;
            });
        if (!indistinct) vocabulary.push_back(std::move(step));
        return;
      }
      for (const std::string& arg :
           slots[slot] == SlotKind::kObject ? objects : locations) {
        args.push_back(arg);
        self(self, slot + 1);
        args.pop_back();
      }
    };
    fill(fill, 0);
  }
  return vocabulary;
}

ObjectiveTerms toy_objective(const ToyPlanPolicy& policy, const ToyGroup& group,
                             const GrpoConfig& cfg) {
  return grpo_objective(evaluate_group(policy, group), cfg);
}

std::vector<double> toy_objective_gradient(const ToyPlanPolicy& policy,
                                           const ToyGroup& group,
                                           const GrpoConfig& cfg) {
  const ObjectiveTerms terms = toy_objective(policy, group, cfg);
  std::vector<double> grad(policy.logit_table().size(), 0.0);
  for (std::size_t i = 0; i < group.choices.size(); ++i) {
    policy.accumulate_log_prob_gradient(group.choices[i], terms.d_logp_new[i], grad);
  }
  return grad;
}

GradientCheckResult gradient_check(const ToyPlanPolicy& policy,
                                   const ToyGroup& group,
                                   const GrpoConfig& cfg) {
  constexpr double kStep = 1e-5;
  GradientCheckResult result;
  result.analytic = toy_objective_gradient(policy, group, cfg);
  result.numeric.resize(result.analytic.size());

  ToyPlanPolicy probe = policy;
  auto table = probe.logit_table();
  for (std::size_t k = 0; k < table.size(); ++k) {
    const double saved = table[k];
    table[k] = saved + kStep;
    const double plus = toy_objective(probe, group, cfg).objective;
    table[k] = saved - kStep;
    const double minus = toy_objective(probe, group, cfg).objective;
    table[k] = saved;
    result.numeric[k] = (plus - minus) / (2.0 * kStep);

    const double a = result.analytic[k];
    const double n = result.numeric[k];
    const double scale = std::max({std::abs(a), std::abs(n), 1e-8});
    result.max_relative_error =
        std::max(result.max_relative_error, std::abs(a - n) / scale);
  }
  return result;
}

TrainReport train_toy(std::span<const ToyTask> tasks,
                      std::span<const PlanStep> vocabulary,
                      const GrpoConfig& cfg, const SkillGrammar& grammar,
                      const Ontology& ontology, const RewardWeights& weights) {
  cfg.validate();
  weights.validate();
  if (tasks.empty()) throw std::invalid_argument("train_toy needs at least one task");

  std::size_t horizon = cfg.horizon;
  if (horizon == 0) {
    for (const ToyTask& task : tasks) {
      horizon = std::max(horizon, task.ground_truth.size() + 1);
    }
  }
  std::vector<ToyPlanPolicy> policies(tasks.size(),
                                      ToyPlanPolicy(horizon, vocabulary.size()));
  const std::size_t per_step = cfg.prompts_per_step == 0
                                   ? tasks.size()
                                   : std::min(cfg.prompts_per_step, tasks.size());
  std::vector<AdamState> adam(tasks.size());
  std::vector<double> first_mean(tasks.size(), 0.0);
  std::vector<double> last_mean(tasks.size(), 0.0);
  std::vector<char> seen(tasks.size(), 0);
  Rng rng(cfg.seed);
  TrainReport report;
  report.steps.reserve(cfg.steps);

  std::size_t cursor = 0;
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    TrainStepRecord record;
    record.step = step;
    record.first_task = cursor;
    record.tasks = per_step;
    std::size_t samples = 0;
    std::size_t clipped = 0;
    for (std::size_t n = 0; n < per_step; ++n) {
      const std::size_t t = cursor;
      cursor = (cursor + 1) % tasks.size();
      ToyPlanPolicy& policy = policies[t];

      ToyGroup group;
      std::vector<double> rewards;
      for (std::size_t i = 0; i < cfg.group_size; ++i) {
        Rollout rollout = policy_sample(policy, vocabulary, grammar, rng);
        rewards.push_back(total_reward(rollout.response, tasks[t].ground_truth,
                                       grammar, ontology, weights)
                              .total);
        group.choices.push_back(std::move(rollout.choices));
        group.logp_old.push_back(rollout.logp);
      }
      group.advantages = group_advantages(rewards);

      double group_mean = 0.0;
      for (std::size_t i = 0; i < rewards.size(); ++i) {
        group_mean += rewards[i];
        record.mean_abs_advantage += std::abs(group.advantages[i]);
      }
      group_mean /= static_cast<double>(rewards.size());
      record.mean_reward += group_mean;
      if (!seen[t]) first_mean[t] = group_mean;
      seen[t] = 1;
      last_mean[t] = group_mean;

      for (std::size_t epoch = 0; epoch < cfg.inner_epochs; ++epoch) {
        const ObjectiveTerms terms = toy_objective(policy, group, cfg);
        if (epoch == 0) {
          record.kl += terms.mean_kl;
          record.loss += terms.loss;
        }
        if (epoch + 1 == cfg.inner_epochs) {
          clipped += static_cast<std::size_t>(
              std::lround(terms.clip_fraction * static_cast<double>(cfg.group_size)));
        }
        std::vector<double> grad(policy.logit_table().size(), 0.0);
        for (std::size_t i = 0; i < group.choices.size(); ++i) {
          policy.accumulate_log_prob_gradient(group.choices[i], terms.d_logp_new[i],
                                              grad);
        }
        apply_update(policy.logit_table(), grad, cfg, adam[t]);
      }
      samples += cfg.group_size;
    }
    const auto groups = static_cast<double>(per_step);
    record.mean_reward /= groups;
    record.kl /= groups;
    record.loss /= groups;
    record.mean_abs_advantage /= static_cast<double>(samples);
    record.clip_fraction = static_cast<double>(clipped) / static_cast<double>(samples);
    report.steps.push_back(record);

    if (cfg.reference_refresh > 0 && (step + 1) % cfg.reference_refresh == 0) {
      for (ToyPlanPolicy& p : policies) p.snapshot_reference();
    }
  }

  std::size_t trained = 0;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    if (!seen[t]) continue;
    report.initial_mean_reward += first_mean[t];
    report.final_mean_reward += last_mean[t];
    ++trained;
  }
  if (trained > 0) {
    report.initial_mean_reward /= static_cast<double>(trained);
    report.final_mean_reward /= static_cast<double>(trained);
  }

  for (std::size_t t = 0; t < tasks.size(); ++t) {
    TaskOutcome outcome;
    outcome.task = t;
    outcome.greedy_plan = decode_choices(policies[t].greedy(), vocabulary);
    outcome.greedy_reward =
        total_reward(render_response(outcome.greedy_plan, grammar),
                     tasks[t].ground_truth, grammar, ontology, weights)
            .total;
    outcome.exact_match = outcome.greedy_plan == tasks[t].ground_truth;
    outcome.unordered_match = same_multiset(outcome.greedy_plan, tasks[t].ground_truth);
    report.exact_matches += outcome.exact_match ? 1 : 0;
    report.unordered_matches += outcome.unordered_match ? 1 : 0;
    report.outcomes.push_back(std::move(outcome));
  }
  report.policies = std::move(policies);
  return report;
}

}  // namespace rever
