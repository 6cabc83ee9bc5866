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

#include "rever/grpo.hpp"

#include <algorithm>
#include <cmath>

namespace rever {

void GrpoConfig::validate() const {
  if (group_size < 2) throw GroupTooSmall();
  if (!(clip > 0.0 && clip < 1.0)) {
    throw std::invalid_argument("clip must lie in (0, 1)");
  }
  if (!(kl_weight >= 0.0) || !std::isfinite(kl_weight)) {
    throw std::invalid_argument("kl_weight must be finite and >= 0");
  }
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning_rate must be finite and >= 0");
  }
  if (inner_epochs == 0) throw std::invalid_argument("inner_epochs must be >= 1");
}

std::vector<double> group_advantages(std::span<const double> rewards) {
  if (rewards.size() < 2) throw GroupTooSmall();
  std::vector<double> advantages(rewards.size(), 0.0);
  const auto [lo, hi] = std::minmax_element(rewards.begin(), rewards.end());
  if (*lo == *hi) return advantages;

  // Centered on the first reward so equal rewards give exactly zero deviation.
  const auto n = static_cast<double>(rewards.size());
  const double shift = rewards.front();
  double offset = 0.0;
  for (double r : rewards) offset += r - shift;
  offset /= n;
  double var = 0.0;
  for (double r : rewards) {
    const double d = (r - shift) - offset;
    var += d * d;
  }
  const double std = std::sqrt(var / n);
  if (std == 0.0) return advantages;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    advantages[i] = ((rewards[i] - shift) - offset) / std;
  }
  return advantages;
}

double kl_k3(double logp_ref, double logp_new) {
  const double d = logp_ref - logp_new;
  return std::exp(d) - d - 1.0;
}

ObjectiveTerms grpo_objective(const GrpoGroup& group, const GrpoConfig& cfg) {
  const std::size_t b = group.advantages.size();
  if (b == 0 || group.logp_old.size() != b || group.logp_new.size() != b ||
      group.logp_ref.size() != b) {
    throw std::invalid_argument("group arrays must be non-empty and equal length");
  }
  for (std::size_t i = 0; i < b; ++i) {
    if (!std::isfinite(group.logp_old[i]) || !std::isfinite(group.logp_new[i]) ||
        !std::isfinite(group.logp_ref[i])) {
      throw NonFiniteLogProb("non-finite log-probability at sample " +
                             std::to_string(i));
    }
  }

  ObjectiveTerms terms;
  terms.d_logp_new.resize(b);
  const double inv_b = 1.0 / static_cast<double>(b);
  std::size_t clipped = 0;
  for (std::size_t i = 0; i < b; ++i) {
    const double advantage = group.advantages[i];
    const double ratio = std::exp(group.logp_new[i] - group.logp_old[i]);
    const double clipped_ratio = std::clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip);
    const double unclipped_term = ratio * advantage;
    const double clipped_term = clipped_ratio * advantage;
    if (ratio < 1.0 - cfg.clip || ratio > 1.0 + cfg.clip) ++clipped;

    const double kl = kl_k3(group.logp_ref[i], group.logp_new[i]);
    terms.objective += std::min(unclipped_term, clipped_term) - cfg.kl_weight * kl;
    terms.mean_kl += kl;

    // d(ratio)/d(logp_new) = ratio; the clipped branch is flat.
    const double d_surrogate = unclipped_term <= clipped_term ? unclipped_term : 0.0;
    const double d_kl = 1.0 - std::exp(group.logp_ref[i] - group.logp_new[i]);
    terms.d_logp_new[i] = (d_surrogate - cfg.kl_weight * d_kl) * inv_b;
  }
  terms.objective *= inv_b;
  terms.loss = -terms.objective;
  terms.mean_kl *= inv_b;
  terms.clip_fraction = static_cast<double>(clipped) * inv_b;
  return terms;
}

}  // namespace rever
