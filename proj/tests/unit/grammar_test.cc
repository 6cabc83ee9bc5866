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

#include "rever/grammar.hpp"

#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rever/random.hpp"
#include "rever/text.hpp"

namespace rever {
namespace {

std::string read_golden(const std::string& name) {
  std::ifstream in(std::string(REVER_GOLDEN_DIR) + "/" + name, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class GrammarTest : public ::testing::Test {
 protected:
  SkillGrammar grammar_ = SkillGrammar::default_grammar();
};

TEST_F(GrammarTest, DefaultGrammarHasNineTemplates) {
  ASSERT_EQ(grammar_.size(), 9u);
  EXPECT_EQ(grammar_.at(0).surface_pattern(), "Put [object] on [location].");
  EXPECT_EQ(grammar_.at(8).surface_pattern(), "Place into [location].");
}

TEST_F(GrammarTest, VerbsDropPrepositions) {
  EXPECT_EQ(grammar_.at(*grammar_.find("Put [object] on [location].")).verb(), "Put");
  EXPECT_EQ(grammar_.at(*grammar_.find("Put [object] into [location].")).verb(), "Put");
  EXPECT_EQ(grammar_.at(*grammar_.find("Pick up [object].")).verb(), "Pick up");
  EXPECT_EQ(grammar_.at(*grammar_.find("Pick up [object] and pour into [location].")).verb(),
            "Pick up ... and pour");
  EXPECT_EQ(grammar_.at(*grammar_.find("Place on [location].")).verb(), "Place");
}

TEST_F(GrammarTest, ParseResponseMinimal) {
  auto parts = parse_response("<think>reason</think><answer>1. Pick up apple.</answer>");
  ASSERT_TRUE(parts);
  EXPECT_EQ(parts->think, "reason");
  EXPECT_EQ(parts->answer, "1. Pick up apple.");
}

TEST_F(GrammarTest, ParseResponseErrors) {
  auto order = parse_response("<answer>x</answer><think>y</think>");
  ASSERT_FALSE(order);
  EXPECT_EQ(order.error().kind, FormatErrorKind::kTagOrderViolation);

  auto dup = parse_response("<think>a</think><answer>b</answer><answer>c</answer>");
  ASSERT_FALSE(dup);
  EXPECT_EQ(dup.error().kind, FormatErrorKind::kDuplicateTag);

  auto missing = parse_response("<think>t</think>");
  ASSERT_FALSE(missing);
  EXPECT_EQ(missing.error().kind, FormatErrorKind::kMissingTag);

  auto trailing = parse_response("<think>t</think><answer>a</answer> done");
  ASSERT_FALSE(trailing);
  EXPECT_EQ(trailing.error().kind, FormatErrorKind::kTrailingContent);

  EXPECT_TRUE(parse_response("  \n<think>t</think>\n<answer>a</answer>\n"));
}

TEST_F(GrammarTest, ParsePlanInstantiatesTemplate) {
  auto plan = parse_plan("1. Put apple into basket.", grammar_);
  ASSERT_TRUE(plan);
  ASSERT_EQ(plan->size(), 1u);
  EXPECT_EQ(plan->steps[0].template_id, *grammar_.find("Put [object] into [location]."));
  EXPECT_EQ(plan->steps[0].args, (std::vector<std::string>{"apple", "basket"}));
}

TEST_F(GrammarTest, ParsePlanTrailingPeriodOptional) {
  auto with = parse_plan("1. Pick up red apple.", grammar_);
  auto without = parse_plan("1.   Pick up   red apple", grammar_);
  ASSERT_TRUE(with);
  ASSERT_TRUE(without);
  EXPECT_EQ(*with, *without);
}

TEST_F(GrammarTest, ParsePlanNoTemplate) {
  auto plan = parse_plan("1. Throw apple away.", grammar_);
  ASSERT_FALSE(plan);
  EXPECT_EQ(plan.error().front().kind, StepErrorKind::kNoTemplateMatch);
}

TEST_F(GrammarTest, ParsePlanCaseSensitiveVerbs) {
  auto plan = parse_plan("1. put apple into basket.", grammar_);
  ASSERT_FALSE(plan);
  EXPECT_EQ(plan.error().front().kind, StepErrorKind::kNoTemplateMatch);
}

TEST_F(GrammarTest, ParsePlanNonconsecutiveMatchesRenumberOracle) {
  const std::string answer = "1. Put apple into basket.\n3. Pick up pen.";
  auto plan = parse_plan(answer, grammar_);
  ASSERT_FALSE(plan);
  ASSERT_EQ(plan.error().size(), 1u);
  EXPECT_EQ(plan.error()[0].kind, StepErrorKind::kNonconsecutiveNumbering);
  EXPECT_EQ(plan.error()[0].line_number, 2u);
  // The renumbered text differs from the input exactly where the error is
  // reported, and parses cleanly.
  EXPECT_TRUE(parse_plan(testing::renumber(answer), grammar_));
}

TEST_F(GrammarTest, ParsePlanUnnumberedAndEmptySlot) {
  auto unnumbered = parse_plan("Pick up pen.", grammar_);
  ASSERT_FALSE(unnumbered);
  EXPECT_EQ(unnumbered.error()[0].kind, StepErrorKind::kUnnumberedLine);

  auto empty = parse_plan("1. Put into basket.", grammar_);
  ASSERT_FALSE(empty);
  EXPECT_EQ(empty.error()[0].kind, StepErrorKind::kEmptySlot);
  EXPECT_EQ(empty.error()[0].slot, "object");
}

TEST_F(GrammarTest, SpecificTemplateWinsOverPrefix) {
  auto plan = parse_plan("1. Pick up teapot and pour into pitcher.", grammar_);
  ASSERT_TRUE(plan);
  EXPECT_EQ(plan->steps[0].template_id,
            *grammar_.find("Pick up [object] and pour into [location]."));
  EXPECT_EQ(plan->steps[0].args, (std::vector<std::string>{"teapot", "pitcher"}));
}

TEST_F(GrammarTest, AmbiguousMatchReported) {
  auto g = SkillGrammar::parse("Move [object] to [location].\nMove [location] to [object].");
  ASSERT_TRUE(g);
  auto plan = parse_plan("1. Move a to b.", *g);
  ASSERT_FALSE(plan);
  EXPECT_EQ(plan.error()[0].kind, StepErrorKind::kAmbiguousTemplateMatch);
}

TEST_F(GrammarTest, RoundTripProperty) {
  Rng rng(11);
  for (int n = 0; n < 300; ++n) {
    const Plan plan =
        testing::random_plan(rng, grammar_, 1 + rng.below(7), testing::tricky_arguments());
    auto parsed = parse_plan(grammar_.render_plan(plan), grammar_);
    ASSERT_TRUE(parsed) << grammar_.render_plan(plan);
    EXPECT_EQ(*parsed, plan);
  }
}

TEST_F(GrammarTest, NoStepMatchesTwoTemplates) {
  Rng rng(12);
  for (int n = 0; n < 500; ++n) {
    const Plan plan = testing::random_plan(rng, grammar_, 1, testing::tricky_arguments());
    const auto words = text::split_words(grammar_.render_step(plan.steps[0]));
    std::vector<std::string> stripped(words.begin(), words.end());
    stripped.back().pop_back();  // final period
    std::size_t matches = 0;
    std::size_t best_literals = 0;
    std::size_t at_best = 0;
    for (const SkillTemplate& t : grammar_.templates()) {
      if (!t.match(stripped)) continue;
      ++matches;
      if (t.literal_word_count() > best_literals) {
        best_literals = t.literal_word_count();
        at_best = 1;
      } else if (t.literal_word_count() == best_literals) {
        ++at_best;
      }
    }
    ASSERT_GE(matches, 1u);
    EXPECT_EQ(at_best, 1u) << grammar_.render_step(plan.steps[0]);
  }
}

TEST_F(GrammarTest, GrammarFileFormat) {
  auto g = SkillGrammar::parse(
      "# comment\n\nverb=Stack | Put [object] on [location].  # trailing\nOpen [object].\n");
  ASSERT_TRUE(g) << g.error();
  ASSERT_EQ(g->size(), 2u);
  EXPECT_EQ(g->at(0).verb(), "Stack");
  EXPECT_EQ(g->at(0).slots(), (std::vector<SlotKind>{SlotKind::kObject, SlotKind::kLocation}));
  EXPECT_FALSE(SkillGrammar::parse("Open [object].\nOpen [object]."));
  EXPECT_FALSE(SkillGrammar::parse("Open [thing]."));
}

TEST_F(GrammarTest, DataFilesMatchBuiltIns) {
  const SkillGrammar loaded = SkillGrammar::load(std::string(REVER_DATA_DIR) + "/grammar.txt");
  ASSERT_EQ(loaded.size(), grammar_.size());
  for (std::size_t i = 0; i < grammar_.size(); ++i) {
    EXPECT_EQ(loaded.at(i).surface_pattern(), grammar_.at(i).surface_pattern());
    EXPECT_EQ(loaded.at(i).verb(), grammar_.at(i).verb());
  }
  const Ontology ontology = Ontology::load(std::string(REVER_DATA_DIR) + "/ontology.txt");
  EXPECT_EQ(ontology.sets().size(), Ontology::default_ontology().sets().size());
  EXPECT_TRUE(ontology.share_set("Mug", " cup "));
}

TEST_F(GrammarTest, OntologyRules) {
  const Ontology o = Ontology::default_ontology();
  EXPECT_TRUE(o.share_set("basket", "HAMPER"));
  EXPECT_FALSE(o.share_set("basket", "box"));
  EXPECT_FALSE(Ontology::parse("solo: one"));
  EXPECT_FALSE(Ontology::parse("no colon here"));
}

TEST_F(GrammarTest, PlanningPromptGolden) {
  EXPECT_EQ(render_prompt(PromptKind::kPlanning, grammar_,
                          "Tidy up the small items on the desktop"),
            read_golden("planning_prompt.txt"));
}

TEST_F(GrammarTest, CompletionPromptGolden) {
  EXPECT_EQ(render_prompt(PromptKind::kCompletion, grammar_,
                          "Pick up the teacup and place it on the saucer."),
            read_golden("completion_prompt.txt"));
}

TEST_F(GrammarTest, PlanningPromptListsEachTemplateOnce) {
  auto g = SkillGrammar::parse("Open [object].");
  ASSERT_TRUE(g);
  const std::string prompt = render_prompt(PromptKind::kPlanning, *g, "x");
  std::size_t dash_lines = 0;
  for (const std::string& line : text::split_lines(prompt)) {
    if (line.rfind("- ", 0) == 0) ++dash_lines;
  }
  EXPECT_EQ(dash_lines, 1u);
}

}  // namespace
}  // namespace rever
