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

#include "rever/reward.hpp"

#include <algorithm>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rever/random.hpp"

namespace rever {
namespace {

class RewardTest : public ::testing::Test {
 protected:
  PlanStep step(std::string_view text) const {
    auto parsed = parse_step(text, grammar_);
    EXPECT_TRUE(parsed) << text;
    return *parsed;
  }
  Plan plan(std::initializer_list<std::string_view> steps) const {
    Plan p;
    for (std::string_view s : steps) p.steps.push_back(step(s));
    return p;
  }
  std::string respond(const Plan& p) const {
    return "<think>t</think><answer>" + grammar_.render_plan(p) + "</answer>";
  }

  SkillGrammar grammar_ = SkillGrammar::default_grammar();
  Ontology ontology_ = Ontology::default_ontology();
  RewardWeights w_;
};

TEST_F(RewardTest, StepSimilarityExamples) {
  EXPECT_EQ(step_similarity(step("Put apple into basket."), step("Put apple into basket."),
                            grammar_, ontology_, w_),
            1.0);
  EXPECT_NEAR(step_similarity(step("Put apple into basket."), step("Put pen into basket."),
                              grammar_, ontology_, w_),
              0.3 * 1 + 0.7 * 0.5, 1e-12);
  EXPECT_NEAR(step_similarity(step("Pick up teacup."), step("Pick up cup."), grammar_,
                              Ontology(), w_),
              1.0, 1e-12);
  EXPECT_EQ(step_similarity(step("Put apple on tray."), step("Open box."), grammar_,
                            ontology_, w_),
            0.0);
}

TEST_F(RewardTest, OntologyMakesSynonymsSimilar) {
  EXPECT_TRUE(arguments_similar("mug", "Cup", ontology_));
  EXPECT_FALSE(arguments_similar("mug", "cup", Ontology()));
  EXPECT_TRUE(arguments_similar(" Red Apple ", "apple", Ontology()));
}

TEST_F(RewardTest, SlotCountMismatchAveragesOverLongerList) {
  // Place(location=basket) vs Put(object=apple, location=basket): position 0
  // compares basket with apple, position 1 has no partner.
  EXPECT_NEAR(step_similarity(step("Place into basket."), step("Put apple into basket."),
                              grammar_, ontology_, w_),
              0.0, 1e-12);
  EXPECT_NEAR(step_similarity(step("Pour into teacup."),
                              step("Pick up teapot and pour into teacup."), grammar_,
                              ontology_, w_),
              0.0, 1e-12);
  EXPECT_NEAR(step_similarity(step("Push box."), step("Put box into drawer."), grammar_,
                              ontology_, w_),
              0.7 * 0.5, 1e-12);
}

TEST_F(RewardTest, BipartiteExamples) {
  const Plan gt = plan({"Pick up apple.", "Put apple into basket.", "Open box."});
  const MatchScore same = bipartite_match_score(gt, gt, grammar_, ontology_, w_);
  EXPECT_EQ(same.bm, 1.0);
  ASSERT_EQ(same.matching.pairs.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(same.matching.pairs[i].generated, i);
    EXPECT_EQ(same.matching.pairs[i].ground_truth, i);
  }

  Plan reversed = gt;
  std::reverse(reversed.steps.begin(), reversed.steps.end());
  EXPECT_EQ(bipartite_match_score(reversed, gt, grammar_, ontology_, w_).bm, 1.0);

  const Plan one = plan({"Pick up apple."});
  const Plan two = plan({"Pick up apple.", "Put apple into basket."});
  EXPECT_NEAR(bipartite_match_score(one, two, grammar_, ontology_, w_).bm, 0.5, 1e-12);
  EXPECT_NEAR(content_reward(one, two, grammar_, ontology_, w_), 0.4, 1e-12);
}

TEST_F(RewardTest, ContentCanGoNegative) {
  const Plan gt = plan({"Pick up apple.", "Put pen into basket."});
  const Plan junk = plan(
      {"Open drawer.", "Push drawer.", "Place on tray.", "Pour into teacup.", "Open lid."});
  EXPECT_EQ(bipartite_match_score(junk, gt, grammar_, ontology_, w_).bm, 0.0);
  EXPECT_NEAR(content_reward(junk, gt, grammar_, ontology_, w_), -0.3, 1e-12);
}

TEST_F(RewardTest, EmptyGenerated) {
  const MatchScore s =
      bipartite_match_score(Plan{}, plan({"Open box."}), grammar_, ontology_, w_);
  EXPECT_EQ(s.bm, 0.0);
  EXPECT_TRUE(s.matching.pairs.empty());
  EXPECT_THROW(bipartite_match_score(plan({"Open box."}), Plan{}, grammar_, ontology_, w_),
               EmptyGroundTruth);
}

TEST_F(RewardTest, CompletionRewardIsExact) {
  EXPECT_EQ(completion_reward("True", true), 1);
  EXPECT_EQ(completion_reward("  False\n", false), 1);
  EXPECT_EQ(completion_reward("true", true), 0);
  EXPECT_EQ(completion_reward("False", true), 0);
  EXPECT_EQ(completion_reward("The task is done", true), 0);
}

TEST_F(RewardTest, FormatRewardExamples) {
  EXPECT_EQ(format_reward("<think>t</think><answer>a</answer>"), 1);
  EXPECT_EQ(format_reward("answer only, no tags"), 0);
  EXPECT_EQ(format_reward("<think>t</think>"), 0);
}

TEST_F(RewardTest, TotalRewardExamples) {
  const Plan gt = plan({"Pick up pen.", "Place into box."});
  const RewardBreakdown ok = total_reward(respond(gt), gt, grammar_, ontology_, w_);
  EXPECT_EQ(ok.format, 1);
  EXPECT_EQ(ok.content, 1.0);
  EXPECT_NEAR(ok.total, w_.format + w_.content, 1e-12);

  const RewardBreakdown no_think = total_reward(
      "<answer>" + grammar_.render_plan(gt) + "</answer>", gt, grammar_, ontology_, w_);
  EXPECT_EQ(no_think.format, 0);
  EXPECT_EQ(no_think.content, 1.0);
  EXPECT_NEAR(no_think.total, w_.content, 1e-12);

  const RewardBreakdown bad_line = total_reward(
      "<think>t</think><answer>1. Juggle pen.</answer>", gt, grammar_, ontology_, w_);
  EXPECT_EQ(bad_line.format, 1);
  EXPECT_EQ(bad_line.content, 0.0);
  EXPECT_NEAR(bad_line.total, w_.format, 1e-12);
  EXPECT_FALSE(bad_line.diagnostics.empty());
}

TEST_F(RewardTest, TotalRewardCompletionMode) {
  const RewardBreakdown r =
      total_reward("<think>looks done</think><answer>True</answer>", true, grammar_,
                   ontology_, w_);
  EXPECT_EQ(r.task_type, TaskType::kCompletion);
  EXPECT_NEAR(r.total, 1.0, 1e-12);
  EXPECT_NEAR(total_reward("<think>x</think><answer>True</answer>", false, grammar_,
                           ontology_, w_)
                  .total,
              w_.format, 1e-12);
}

TEST_F(RewardTest, WeightsValidate) {
  RewardWeights bad;
  bad.action = 0.5;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = RewardWeights{};
  bad.length = -1;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  EXPECT_NO_THROW(RewardWeights{}.validate());
}

TEST_F(RewardTest, Properties) {
  Rng rng(99);
  const auto& args = testing::tricky_arguments();
  for (int n = 0; n < 300; ++n) {
    const Plan a = testing::random_plan(rng, grammar_, rng.below(7), args);
    const Plan b = testing::random_plan(rng, grammar_, 1 + rng.below(6), args);

    const SimilarityMatrix m = similarity_matrix(a, b, grammar_, ontology_, w_);
    for (std::size_t r = 0; r < m.rows(); ++r) {
      for (std::size_t c = 0; c < m.cols(); ++c) {
        ASSERT_GE(m(r, c), 0.0);
        ASSERT_LE(m(r, c), 1.0);
        EXPECT_EQ(m(r, c), step_similarity(b.steps[c], a.steps[r], grammar_, ontology_, w_));
      }
    }

    const MatchScore ab = bipartite_match_score(a, b, grammar_, ontology_, w_);
    EXPECT_GE(ab.bm, 0.0);
    EXPECT_LE(ab.bm, 1.0);
    EXPECT_LE(ab.matching.total_weight,
              static_cast<double>(std::min(a.size(), b.size())) + 1e-12);
    if (!a.empty()) {
      EXPECT_NEAR(ab.bm, bipartite_match_score(b, a, grammar_, ontology_, w_).bm, 1e-12);
      EXPECT_NEAR(content_reward(a, b, grammar_, ontology_, w_),
                  content_reward(b, a, grammar_, ontology_, w_), 1e-12);
      EXPECT_EQ(content_reward(a, a, grammar_, ontology_, w_), 1.0);
    }

    Plan shuffled = a;
    rng.shuffle(std::span<PlanStep>(shuffled.steps));
    EXPECT_NEAR(bipartite_match_score(shuffled, b, grammar_, ontology_, w_).bm, ab.bm,
                1e-12);

    // A duplicated step can only add its own best partner to the matching.
    for (const MatchedPair& p : ab.matching.pairs) {
      Plan dup = a;
      dup.steps.push_back(a.steps[p.generated]);
      const MatchScore d = bipartite_match_score(dup, b, grammar_, ontology_, w_);
      EXPECT_GE(d.matching.total_weight, ab.matching.total_weight - 1e-12);
      EXPECT_LE(d.matching.total_weight, ab.matching.total_weight + 1.0 + 1e-12);
    }
  }
}

TEST_F(RewardTest, DuplicateCanFillUnmatchedTarget) {
  const Plan gt = plan({"Pick up apple.", "Pick up apple."});
  EXPECT_EQ(bipartite_match_score(plan({"Pick up apple."}), gt, grammar_, ontology_, w_).bm,
            0.5);
  EXPECT_EQ(bipartite_match_score(gt, gt, grammar_, ontology_, w_).bm, 1.0);
}

TEST_F(RewardTest, FormatRewardAgreesWithParseResponse) {
  const std::vector<std::string> texts = {
      "<think>a</think><answer>b</answer>", "<think></think><answer></answer>",
      "<answer>b</answer>", "<think>a</think>b", "x<think>a</think><answer>b</answer>",
      "<think>a<answer>b</answer></think>", "<think>a</think><answer>b</answer>\n\n",
      "<THINK>a</THINK><ANSWER>b</ANSWER>"};
  for (const std::string& t : texts) {
    EXPECT_EQ(format_reward(t) == 1, parse_response(t).has_value()) << t;
  }
}

}  // namespace
}  // namespace rever
