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

#ifndef REVER_GRAMMAR_HPP_
#define REVER_GRAMMAR_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rever/expected.hpp"

namespace rever {

class GrammarError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SlotKind { kObject, kLocation };

std::string_view to_string(SlotKind kind);

// One executable skill, e.g. "Put [object] into [location].".
//
// The pattern is stored as alternating literal word runs and slots:
// literal[0] slot[0] literal[1] slot[1] ... literal[n]. Literal runs other
// than the outer two are never empty, so adjacent slots cannot occur.
class SkillTemplate {
 public:
  // Builds a template from its surface pattern. An empty `verb_override`
  // derives the verb lexeme from the literal words, dropping prepositions.
  static Expected<SkillTemplate, std::string> parse(
      std::string_view surface_pattern, std::string_view verb_override = {});

  const std::string& verb() const { return verb_; }
  const std::vector<SlotKind>& slots() const { return slots_; }
  // Canonical display form, always ending in a period.
  const std::string& surface_pattern() const { return surface_; }
  std::size_t literal_word_count() const;

  // Matches a whitespace-split step (numbering and final period removed).
  // Slot captures are greedy. With `allow_empty` a slot may capture nothing,
  // which the caller reports as EmptySlot.
  std::optional<std::vector<std::string>> match(
      std::span<const std::string> words, bool allow_empty = false) const;

  std::string render(std::span<const std::string> args) const;

 private:
  std::string verb_;
  std::string surface_;
  std::vector<SlotKind> slots_;
  std::vector<std::vector<std::string>> literals_;
};

struct PlanStep {
  std::size_t template_id = 0;
  // Slot arguments in template slot order; trimmed, whitespace-normalized.
  std::vector<std::string> args;

  friend bool operator==(const PlanStep&, const PlanStep&) = default;
};

struct Plan {
  std::vector<PlanStep> steps;

  std::size_t size() const { return steps.size(); }
  bool empty() const { return steps.empty(); }
  friend bool operator==(const Plan&, const Plan&) = default;
};

class SkillGrammar {
 public:
  // The nine skills listed in the planning prompt.
  static SkillGrammar default_grammar();

  // Grammar file: one template per line, optional "verb=<lexeme> |" prefix,
  // '#' starts a comment.
  static Expected<SkillGrammar, std::string> parse(std::string_view text);
  static SkillGrammar load(const std::filesystem::path& path);

  explicit SkillGrammar(std::vector<SkillTemplate> templates);

  std::span<const SkillTemplate> templates() const { return templates_; }
  const SkillTemplate& at(std::size_t template_id) const;
  std::size_t size() const { return templates_.size(); }
  std::optional<std::size_t> find(std::string_view surface_pattern) const;

  // Validates and normalizes arguments; throws GrammarError on mismatch.
  PlanStep make_step(std::size_t template_id,
                     std::vector<std::string> args) const;

  std::string render_step(const PlanStep& step) const;
  // "1. <step>\n2. <step>" with no trailing newline.
  std::string render_plan(const Plan& plan) const;

 private:
  std::vector<SkillTemplate> templates_;
};

// Semantic equivalence sets used by the object-similarity rule.
class Ontology {
 public:
  struct Set {
    std::string name;
    std::vector<std::string> members;
  };

  static Ontology default_ontology();
  // Ontology file: "setname: member1, member2, ..." per line.
  static Expected<Ontology, std::string> parse(std::string_view text);
  static Ontology load(const std::filesystem::path& path);

  Ontology() = default;
  explicit Ontology(std::vector<Set> sets);

  std::span<const Set> sets() const { return sets_; }
  bool share_set(std::string_view a, std::string_view b) const;

 private:
  std::vector<Set> sets_;
  std::unordered_map<std::string, std::vector<std::size_t>> index_;
};

// -- Response template ------------------------------------------------------

struct ResponseParts {
  std::string think;
  std::string answer;
};

enum class FormatErrorKind {
  kMissingTag,
  kDuplicateTag,
  kTagOrderViolation,
  kTrailingContent,
};

std::string_view to_string(FormatErrorKind kind);

struct FormatError {
  FormatErrorKind kind;
  std::string message;
};

// Accepts exactly "<think>..</think><answer>..</answer>" with only whitespace
// outside the two blocks. Inner texts are returned trimmed.
Expected<ResponseParts, FormatError> parse_response(std::string_view text);

// Inner text of the first <answer>..</answer> block, regardless of whether
// the rest of the response follows the template.
std::optional<std::string> extract_answer(std::string_view text);

// -- Plan parsing -------------------------------------------------------------

enum class StepErrorKind {
  kUnnumberedLine,
  kNonconsecutiveNumbering,
  kNoTemplateMatch,
  kAmbiguousTemplateMatch,
  kEmptySlot,
};

std::string_view to_string(StepErrorKind kind);

struct StepParseError {
  StepErrorKind kind;
  std::size_t line_number = 0;  // 1-based line within the answer
  std::string line;
  std::string slot;  // only for kEmptySlot

  std::string describe() const;
};

// Parses one step without its number, e.g. "Put apple into basket.".
Expected<PlanStep, StepParseError> parse_step(std::string_view step_text,
                                              const SkillGrammar& grammar);

// Parses a numbered answer block. Blank lines are skipped; numbering must run
// 1, 2, 3, ... All offending lines are reported, not just the first.
Expected<Plan, std::vector<StepParseError>> parse_plan(
    std::string_view answer, const SkillGrammar& grammar);

// -- Prompts -------------------------------------------------------------------

enum class PromptKind { kPlanning, kCompletion };

// For kCompletion the grammar is unused and `instruction` is the sub-task.
std::string render_prompt(PromptKind kind, const SkillGrammar& grammar,
                          std::string_view instruction);

}  // namespace rever

#endif  // REVER_GRAMMAR_HPP_
