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

#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "rever/random.hpp"

namespace rever {
namespace {

constexpr double kOff = -1e9;

std::vector<PlanStep> vocab(const SkillGrammar& g) {
  return {*parse_step("Pick up apple.", g), *parse_step("Place into basket.", g),
          *parse_step("Open box.", g)};
}

TEST(ToyPolicyTest, ProbabilitiesNormalize) {
  ToyPlanPolicy p(3, 4);
  Rng rng(1);
  for (double& x : p.logit_table()) x = 6 * rng.uniform() - 3;
  for (std::size_t pos = 0; pos < 3; ++pos) {
    const auto probs = p.probabilities(pos);
    EXPECT_NEAR(std::accumulate(probs.begin(), probs.end(), 0.0), 1.0, 1e-12);
  }
  EXPECT_EQ(p.choices(), 5u);
  EXPECT_EQ(p.stop_choice(), 4u);
}

TEST(ToyPolicyTest, StopFirstGivesEmptyPlan) {
  const SkillGrammar g = SkillGrammar::default_grammar();
  const auto v = vocab(g);
  ToyPlanPolicy p(3, v.size());
  for (std::size_t c = 0; c < v.size(); ++c) p.logits(0)[c] = kOff;
  Rng rng(2);
  const Rollout r = policy_sample(p, v, g, rng);
  EXPECT_TRUE(r.plan.empty());
  EXPECT_EQ(r.logp, 0.0);
  EXPECT_EQ(r.response, "<think>Plan the steps required by the request.</think><answer></answer>");
}

TEST(ToyPolicyTest, OneHotPolicyIsDeterministic) {
  const SkillGrammar g = SkillGrammar::default_grammar();
  const auto v = vocab(g);
  ToyPlanPolicy p(3, v.size());
  for (std::size_t pos = 0; pos < 3; ++pos) {
    auto row = p.logits(pos);
    for (double& x : row) x = kOff;
    row[pos < 2 ? pos : p.stop_choice()] = 0.0;
  }
  Rng rng(3);
  const Rollout first = policy_sample(p, v, g, rng);
  for (int i = 0; i < 20; ++i) {
    const Rollout r = policy_sample(p, v, g, rng);
    EXPECT_EQ(r.response, first.response);
    EXPECT_EQ(r.logp, 0.0);
  }
  EXPECT_EQ(first.plan.size(), 2u);
  EXPECT_EQ(first.choices, p.greedy());
}

TEST(ToyPolicyTest, UniformFirstPositionLogProb) {
  const SkillGrammar g = SkillGrammar::default_grammar();
  const auto v = vocab(g);
  ToyPlanPolicy p(2, v.size());
  p.logits(0)[p.stop_choice()] = kOff;
  for (std::size_t c = 0; c < v.size(); ++c) p.logits(1)[c] = kOff;
  Rng rng(4);
  for (int i = 0; i < 10; ++i) {
    const Rollout r = policy_sample(p, v, g, rng);
    ASSERT_EQ(r.plan.size(), 1u);
    EXPECT_NEAR(r.logp, -std::log(static_cast<double>(v.size())), 1e-15);
  }
}

TEST(ToyPolicyTest, SamplingFrequenciesFollowSoftmax) {
  ToyPlanPolicy p(1, 2);
  p.logits(0)[0] = std::log(3.0);  // weights 3 : 1 : 1
  Rng rng(5);
  std::vector<int> counts(3, 0);
  constexpr int kDraws = 50000;
  for (int i = 0; i < kDraws; ++i) ++counts[p.sample(rng).front()];
  EXPECT_NEAR(counts[0] / double(kDraws), 0.6, 0.01);
  EXPECT_NEAR(counts[2] / double(kDraws), 0.2, 0.01);
}

TEST(ToyPolicyTest, LogProbGradientMatchesFiniteDifference) {
  ToyPlanPolicy p(3, 3);
  Rng rng(6);
  for (double& x : p.logit_table()) x = 2 * rng.uniform() - 1;
  const std::vector<std::size_t> choices = {2, 0, 3};
  std::vector<double> grad(p.logit_table().size(), 0.0);
  p.accumulate_log_prob_gradient(choices, 1.0, grad);
  auto table = p.logit_table();
  for (std::size_t k = 0; k < table.size(); ++k) {
    const double saved = table[k];
    table[k] = saved + 1e-6;
    const double up = p.log_prob(choices);
    table[k] = saved - 1e-6;
    const double down = p.log_prob(choices);
    table[k] = saved;
    EXPECT_NEAR(grad[k], (up - down) / 2e-6, 1e-8);
  }
}

TEST(ToyPolicyTest, VocabularyMismatchRejected) {
  const SkillGrammar g = SkillGrammar::default_grammar();
  ToyPlanPolicy p(2, 7);
  Rng rng(7);
  EXPECT_THROW(policy_sample(p, vocab(g), g, rng), std::invalid_argument);
}

}  // namespace
}  // namespace rever
