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

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rever/random.hpp"

namespace rever {
namespace {

GrpoGroup single(double advantage, double ratio) {
  GrpoGroup g;
  g.advantages = {advantage};
  g.logp_old = {-2.0};
  g.logp_new = {-2.0 + std::log(ratio)};
  g.logp_ref = g.logp_new;
  return g;
}

GrpoConfig no_kl() {
  GrpoConfig cfg;
  cfg.kl_weight = 0.0;
  return cfg;
}

TEST(GroupAdvantagesTest, Examples) {
  const auto a = group_advantages(std::vector<double>{0, 1});
  EXPECT_DOUBLE_EQ(a[0], -1.0);
  EXPECT_DOUBLE_EQ(a[1], 1.0);

  for (double x : group_advantages(std::vector<double>{0.4, 0.4, 0.4, 0.4})) {
    EXPECT_EQ(x, 0.0);
  }

  const auto b = group_advantages(std::vector<double>{1, 0, 0, 0});
  // mean 1/4, population std sqrt(3)/4.
  EXPECT_NEAR(b[0], 0.75 / (std::sqrt(3.0) / 4), 1e-12);
  EXPECT_NEAR(b[0], 1.7320508075688772, 1e-12);
  for (int i = 1; i < 4; ++i) EXPECT_NEAR(b[i], -0.5773502691896258, 1e-12);
}

TEST(GroupAdvantagesTest, EqualRewardsWithInexactMean) {
  for (double v : {0.7, 0.1, 1.0 / 3.0, -0.3}) {
    for (std::size_t b : {2, 3, 8, 16}) {
      for (double x : group_advantages(std::vector<double>(b, v))) EXPECT_EQ(x, 0.0) << v;
    }
  }
}

TEST(GroupAdvantagesTest, TooSmall) {
  EXPECT_THROW(group_advantages(std::vector<double>{1.0}), GroupTooSmall);
  EXPECT_THROW(group_advantages(std::vector<double>{}), GroupTooSmall);
}

TEST(GroupAdvantagesTest, StandardizedAndAffineInvariant) {
  Rng rng(3);
  for (int n = 0; n < 500; ++n) {
    std::vector<double> r(2 + rng.below(15));
    for (double& x : r) x = rng.uniform() * 3 - 1;
    const auto a = group_advantages(r);
    const testing::Moments m = testing::moments(a);
    EXPECT_NEAR(static_cast<double>(m.mean), 0.0, 1e-12);
    EXPECT_NEAR(static_cast<double>(m.popstd), 1.0, 1e-12);

    std::vector<double> shifted = r;
    for (double& x : shifted) x = 2.5 * x + 7.0;
    const auto b = group_advantages(shifted);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-9);
  }
}

TEST(KlTest, NonNegativeAndZeroOnlyAtEquality) {
  EXPECT_EQ(kl_k3(-1.5, -1.5), 0.0);
  Rng rng(4);
  for (int n = 0; n < 1000; ++n) {
    const double a = -10 * rng.uniform();
    const double b = -10 * rng.uniform();
    EXPECT_GE(kl_k3(a, b), 0.0);
    if (std::abs(a - b) > 1e-3) EXPECT_GT(kl_k3(a, b), 0.0);
  }
  EXPECT_NEAR(kl_k3(-1.0, -2.0), std::exp(1.0) - 1.0 - 1.0, 1e-15);
}

TEST(GrpoObjectiveTest, ClipExamples) {
  EXPECT_NEAR(grpo_objective(single(1.0, 1.5), no_kl()).objective, 1.2, 1e-12);
  EXPECT_NEAR(grpo_objective(single(-1.0, 0.5), no_kl()).objective, -0.8, 1e-12);
  EXPECT_NEAR(grpo_objective(single(1.0, 0.5), no_kl()).objective, 0.5, 1e-12);
  EXPECT_EQ(grpo_objective(single(1.0, 1.5), no_kl()).clip_fraction, 1.0);
  EXPECT_EQ(grpo_objective(single(1.0, 1.1), no_kl()).clip_fraction, 0.0);
}

TEST(GrpoObjectiveTest, OnPolicyObjectiveIsMeanAdvantage) {
  GrpoGroup g;
  g.advantages = group_advantages(std::vector<double>{0.1, 0.7, 0.3, 0.9});
  g.logp_old = {-1, -2, -3, -4};
  g.logp_new = g.logp_old;
  g.logp_ref = g.logp_old;
  const ObjectiveTerms t = grpo_objective(g, GrpoConfig{});
  EXPECT_NEAR(t.loss, 0.0, 1e-15);
  EXPECT_EQ(t.mean_kl, 0.0);
  // Plain policy gradient: d/dlogp_i = A_i / B.
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(t.d_logp_new[i], g.advantages[i] / 4, 1e-15);
}

TEST(GrpoObjectiveTest, SurrogateNeverExceedsUnclipped) {
  Rng rng(8);
  for (int n = 0; n < 1000; ++n) {
    const double adv = rng.uniform() * 4 - 2;
    const double ratio = 0.2 + 2.0 * rng.uniform();
    const double term = grpo_objective(single(adv, ratio), no_kl()).objective;
    EXPECT_LE(term, ratio * adv + 1e-12);
    if (ratio >= 0.8 && ratio <= 1.2) EXPECT_NEAR(term, ratio * adv, 1e-12);
  }
}

TEST(GrpoObjectiveTest, RejectsNonFinite) {
  GrpoGroup g = single(1.0, 1.0);
  g.logp_new[0] = -std::numeric_limits<double>::infinity();
  EXPECT_THROW(grpo_objective(g, GrpoConfig{}), NonFiniteLogProb);
}

TEST(GrpoConfigTest, Validation) {
  GrpoConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.group_size = 1;
  EXPECT_THROW(cfg.validate(), GroupTooSmall);
  cfg = GrpoConfig{};
  cfg.clip = 1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = GrpoConfig{};
  cfg.kl_weight = -0.1;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  EXPECT_EQ(GrpoConfig{}.group_size, 8u);
  EXPECT_EQ(GrpoConfig{}.kl_weight, 0.04);
  EXPECT_EQ(GrpoConfig{}.clip, 0.2);
}

}  // namespace
}  // namespace rever
