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

#include "rever/toy_policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rever {
namespace {

// log-softmax of one row, evaluated at `choice`.
double log_softmax_at(std::span<const double> row, std::size_t choice) {
  const double peak = *std::max_element(row.begin(), row.end());
  double sum = 0.0;
  for (double x : row) sum += std::exp(x - peak);
  return row[choice] - peak - std::log(sum);
}

double sequence_log_prob(std::span<const double> table, std::size_t choices,
                         std::span<const std::size_t> sequence) {
  double total = 0.0;
  for (std::size_t pos = 0; pos < sequence.size(); ++pos) {
    total += log_softmax_at(table.subspan(pos * choices, choices), sequence[pos]);
  }
  return total;
}

std::vector<double> softmax(std::span<const double> row) {
  const double peak = *std::max_element(row.begin(), row.end());
  std::vector<double> p(row.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    p[i] = std::exp(row[i] - peak);
    sum += p[i];
  }
  for (double& x : p) x /= sum;
  return p;
}

}  // namespace

ToyPlanPolicy::ToyPlanPolicy(std::size_t horizon, std::size_t vocabulary_size)
    : horizon_(horizon),
      choices_(vocabulary_size + 1),
      logits_(horizon * (vocabulary_size + 1), 0.0),
      reference_(logits_) {
  if (horizon == 0) throw std::invalid_argument("policy horizon must be >= 1");
}

std::span<double> ToyPlanPolicy::logits(std::size_t position) {
  return std::span<double>(logits_).subspan(position * choices_, choices_);
}

std::span<const double> ToyPlanPolicy::logits(std::size_t position) const {
  return std::span<const double>(logits_).subspan(position * choices_, choices_);
}

std::vector<double> ToyPlanPolicy::probabilities(std::size_t position) const {
  return softmax(logits(position));
}

double ToyPlanPolicy::log_prob(std::span<const std::size_t> choices) const {
  return sequence_log_prob(logits_, choices_, choices);
}

double ToyPlanPolicy::reference_log_prob(
    std::span<const std::size_t> choices) const {
  return sequence_log_prob(reference_, choices_, choices);
}

void ToyPlanPolicy::accumulate_log_prob_gradient(
    std::span<const std::size_t> choices, double scale,
    std::span<double> grad) const {
  for (std::size_t pos = 0; pos < choices.size(); ++pos) {
    const std::vector<double> p = probabilities(pos);
    double* row = grad.data() + pos * choices_;
    for (std::size_t c = 0; c < choices_; ++c) {
      row[c] += scale * ((c == choices[pos] ? 1.0 : 0.0) - p[c]);
    }
  }
}

std::vector<std::size_t> ToyPlanPolicy::sample(Rng& rng) const {
  std::vector<std::size_t> out;
  for (std::size_t pos = 0; pos < horizon_; ++pos) {
    const std::vector<double> p = probabilities(pos);
    const double u = rng.uniform();
    double cumulative = 0.0;
    std::size_t choice = choices_ - 1;
    for (std::size_t c = 0; c < choices_; ++c) {
      cumulative += p[c];
      if (u < cumulative) {
        choice = c;
        break;
      }
    }
    // Skip zero-probability choices picked only through rounding slack.
    while (p[choice] == 0.0 && choice > 0) --choice;
    out.push_back(choice);
    if (choice == stop_choice()) break;
  }
  return out;
}

std::vector<std::size_t> ToyPlanPolicy::greedy() const {
  std::vector<std::size_t> out;
  for (std::size_t pos = 0; pos < horizon_; ++pos) {
    auto row = logits(pos);
    const auto best = static_cast<std::size_t>(
        std::max_element(row.begin(), row.end()) - row.begin());
    out.push_back(best);
    if (best == stop_choice()) break;
  }
  return out;
}

Plan decode_choices(std::span<const std::size_t> choices,
                    std::span<const PlanStep> vocabulary) {
  Plan plan;
  for (std::size_t c : choices) {
    if (c >= vocabulary.size()) break;
    plan.steps.push_back(vocabulary[c]);
  }
  return plan;
}

std::string render_response(const Plan& plan, const SkillGrammar& grammar) {
  return "<think>Plan the steps required by the request.</think><answer>" +
         grammar.render_plan(plan) + "</answer>";
}

Rollout policy_sample(const ToyPlanPolicy& policy,
                      std::span<const PlanStep> vocabulary,
                      const SkillGrammar& grammar, Rng& rng) {
  if (vocabulary.size() + 1 != policy.choices()) {
    throw std::invalid_argument("vocabulary size does not match policy");
  }
  Rollout rollout;
  rollout.choices = policy.sample(rng);
  rollout.plan = decode_choices(rollout.choices, vocabulary);
  rollout.response = render_response(rollout.plan, grammar);
  rollout.logp = policy.log_prob(rollout.choices);
  return rollout;
}

}  // namespace rever
