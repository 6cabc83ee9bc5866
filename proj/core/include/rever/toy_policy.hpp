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

#ifndef REVER_TOY_POLICY_HPP_
#define REVER_TOY_POLICY_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rever/grammar.hpp"
#include "rever/random.hpp"

namespace rever {

// Tabular plan policy: each of `horizon` positions holds independent logits
// over the candidate steps plus a trailing STOP choice. Sampling runs
// position by position until STOP or the horizon. A second table holds the
// frozen reference policy.
class ToyPlanPolicy {
 public:
  ToyPlanPolicy(std::size_t horizon, std::size_t vocabulary_size);

  std::size_t horizon() const { return horizon_; }
  std::size_t choices() const { return choices_; }
  std::size_t stop_choice() const { return choices_ - 1; }

  std::span<double> logits(std::size_t position);
  std::span<const double> logits(std::size_t position) const;
  std::span<double> logit_table() { return logits_; }
  std::span<const double> logit_table() const { return logits_; }
  std::span<const double> reference_table() const { return reference_; }

  void snapshot_reference() { reference_ = logits_; }

  std::vector<double> probabilities(std::size_t position) const;

  // Exact log-probability of a choice sequence (STOP included when present).
  double log_prob(std::span<const std::size_t> choices) const;
  double reference_log_prob(std::span<const std::size_t> choices) const;

  // grad += scale * d log_prob(choices) / d logits, in logit_table() layout.
  void accumulate_log_prob_gradient(std::span<const std::size_t> choices,
                                    double scale, std::span<double> grad) const;

  std::vector<std::size_t> sample(Rng& rng) const;
  // Argmax per position, lowest index on ties.
  std::vector<std::size_t> greedy() const;

 private:
  std::size_t horizon_;
  std::size_t choices_;
  std::vector<double> logits_;
  std::vector<double> reference_;
};

Plan decode_choices(std::span<const std::size_t> choices,
                    std::span<const PlanStep> vocabulary);

// Wraps a plan in the think/answer template with a fixed think text.
std::string render_response(const Plan& plan, const SkillGrammar& grammar);

struct Rollout {
  std::vector<std::size_t> choices;
  Plan plan;
  std::string response;
  double logp = 0.0;
};

Rollout policy_sample(const ToyPlanPolicy& policy,
                      std::span<const PlanStep> vocabulary,
                      const SkillGrammar& grammar, Rng& rng);

}  // namespace rever

#endif  // REVER_TOY_POLICY_HPP_
