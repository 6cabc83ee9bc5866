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

#ifndef REVER_GRPO_HPP_
#define REVER_GRPO_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rever {

class GroupTooSmall : public std::invalid_argument {
 public:
  GroupTooSmall() : std::invalid_argument("reward group needs at least 2 members") {}
};

class NonFiniteLogProb : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct GrpoConfig {
  std::size_t group_size = 8;   // B
  double clip = 0.2;            // epsilon
  double kl_weight = 0.04;      // beta
  double learning_rate = 0.03;
  std::size_t steps = 2000;
  std::uint64_t seed = 0;
  // Copy the current policy into the reference every N steps; 0 keeps the
  // reference fixed at initialization.
  std::size_t reference_refresh = 0;
  // Gradient steps taken on each sampled group.
  std::size_t inner_epochs = 1;
  // Policy horizon; 0 means longest ground-truth plan + 1.
  std::size_t horizon = 0;
  // Update rule for the toy trainer's logits.
  enum class Optimizer { kSgd, kAdam };
  Optimizer optimizer = Optimizer::kAdam;
  // Rescale each task's gradient to at most this L2 norm; 0 disables.
  double max_grad_norm = 0.0;
  // Prompts (tasks) per optimization step, taken round-robin; 0 means all.
  std::size_t prompts_per_step = 0;

  void validate() const;
};

// (r_i - mean) / popstd; all zeros when the group has no spread.
std::vector<double> group_advantages(std::span<const double> rewards);

struct GrpoGroup {
  std::vector<std::string> responses;
  std::vector<double> rewards;
  std::vector<double> advantages;
  std::vector<double> logp_old;
  std::vector<double> logp_new;
  std::vector<double> logp_ref;
};

// Non-negative KL estimator exp(d) - d - 1 with d = logp_ref - logp_new.
double kl_k3(double logp_ref, double logp_new);

struct ObjectiveTerms {
  double objective = 0.0;
  double loss = 0.0;  // -objective
  double clip_fraction = 0.0;
  double mean_kl = 0.0;
  // d(objective)/d(logp_new_i), already divided by the group size.
  std::vector<double> d_logp_new;
};

// Clipped-surrogate objective with sequence-level ratios and a k3 KL penalty,
// averaged over the group. Throws NonFiniteLogProb.
ObjectiveTerms grpo_objective(const GrpoGroup& group, const GrpoConfig& cfg);

}  // namespace rever

#endif  // REVER_GRPO_HPP_
