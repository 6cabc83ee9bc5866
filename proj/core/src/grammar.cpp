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

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

#include "rever/text.hpp"

namespace rever {
namespace {

constexpr std::string_view kObjectPlaceholder = "[object]";
constexpr std::string_view kLocationPlaceholder = "[location]";

constexpr std::array<std::string_view, 12> kPrepositions = {
    "on", "into", "in", "onto", "to", "from",
    "at", "with", "under", "over", "inside", "off"};

bool is_preposition(std::string_view word) {
  return std::find(kPrepositions.begin(), kPrepositions.end(), word) !=
         kPrepositions.end();
}

std::string join(std::span<const std::string> words, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i > 0) out += sep;
    out += words[i];
  }
  return out;
}

bool literal_at(std::span<const std::string> words, std::size_t pos,
                const std::vector<std::string>& literal) {
  if (pos + literal.size() > words.size()) return false;
  return std::equal(literal.begin(), literal.end(), words.begin() + pos);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw GrammarError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string strip_comment(std::string_view line) {
  auto hash = line.find('#');
  return text::trim(hash == std::string_view::npos ? line : line.substr(0, hash));
}

// Drops one trailing period from the last word, or the word itself if it
// is a lone ".".
void drop_final_period(std::vector<std::string>& words) {
  if (words.empty()) return;
  std::string& last = words.back();
  if (last == ".") {
    words.pop_back();
  } else if (!last.empty() && last.back() == '.') {
    last.pop_back();
  }
}

constexpr std::string_view kPlanningHead =
    "<image> You are a helpful and meticulous robot assistant. Your goal is "
    "to help users with real-world tasks using your gripper.\n"
    "\n"
    "Your available skills are:\n";

constexpr std::string_view kPlanningTail =
    "\n"
    "Based on the image, describe what you see and generate a step-by-step "
    "plan to fulfill the users request. You must ONLY use the available "
    "skills listed above. Each step in your plan must exactly match one of "
    "the skill formats.\n"
    "\n"
    "The plan should be numbered like this:\n"
    "1. [Skill with object and location]\n"
    "2. [Skill with object and location]\n"
    "...\n"
    "\n"
    "Avoid empty, duplicate, or irrelevant steps.\n";

constexpr std::string_view kCompletionHead =
    "<image><image>You are a precise robot assistant tasked with verifying "
    "if an action has been successfully completed.\n"
    "\n"
    "The first image shows the initial state of the environment before the "
    "action. The second image shows the final state after the action was "
    "attempted.\n"
    "\n"
    "Based on your observation of both images, determine if the following "
    "action was completed:\n"
    "\n";

constexpr std::string_view kCompletionTail =
    "\n"
    "Output ONLY True if the second image clearly shows the object is in the "
    "target location as described in the action. Otherwise, output ONLY "
    "False.\n";

}  // namespace

std::string_view to_string(SlotKind kind) {
  return kind == SlotKind::kObject ? "object" : "location";
}

// -- SkillTemplate --------------------------------------------------------------

Expected<SkillTemplate, std::string> SkillTemplate::parse(
    std::string_view surface_pattern, std::string_view verb_override) {
  std::vector<std::string> words = text::split_words(surface_pattern);
  drop_final_period(words);
  if (words.empty()) return std::string("empty surface pattern");

  SkillTemplate t;
  t.literals_.emplace_back();
  for (const std::string& word : words) {
    if (word == kObjectPlaceholder || word == kLocationPlaceholder) {
      SlotKind kind =
          word == kObjectPlaceholder ? SlotKind::kObject : SlotKind::kLocation;
      if (std::find(t.slots_.begin(), t.slots_.end(), kind) != t.slots_.end()) {
        return "duplicate slot " + word + " in '" + std::string(surface_pattern) + "'";
      }
      if (!t.slots_.empty() && t.literals_.back().empty()) {
        return "adjacent slots in '" + std::string(surface_pattern) + "'";
      }
      t.slots_.push_back(kind);
      t.literals_.emplace_back();
      continue;
    }
    if (word.find_first_of("[]") != std::string::npos) {
      return "unknown placeholder '" + word + "' in '" +
             std::string(surface_pattern) + "'";
    }
    t.literals_.back().push_back(word);
  }

  t.surface_ = text::normalize_space(surface_pattern);
  if (t.surface_.back() != '.') t.surface_.push_back('.');

  if (!verb_override.empty()) {
    t.verb_ = text::normalize_space(verb_override);
  } else {
    std::vector<std::string> parts;
    for (const auto& literal : t.literals_) {
      std::vector<std::string> kept = literal;
      while (!kept.empty() && is_preposition(kept.back())) kept.pop_back();
      if (!kept.empty()) parts.push_back(join(kept, " "));
    }
    t.verb_ = join(parts, " ... ");
  }
  if (t.verb_.empty()) {
    return "no verb in '" + std::string(surface_pattern) + "'";
  }
  return t;
}

std::size_t SkillTemplate::literal_word_count() const {
  std::size_t n = 0;
  for (const auto& literal : literals_) n += literal.size();
  return n;
}

std::optional<std::vector<std::string>> SkillTemplate::match(
    std::span<const std::string> words, bool allow_empty) const {
  const auto& head = literals_.front();
  if (!literal_at(words, 0, head)) return std::nullopt;
  if (slots_.empty()) {
    if (words.size() != head.size()) return std::nullopt;
    return std::vector<std::string>{};
  }
  const auto& tail = literals_.back();
  if (words.size() < head.size() + tail.size()) return std::nullopt;
  const std::size_t slot_end = words.size() - tail.size();
  if (!literal_at(words, slot_end, tail)) return std::nullopt;

  // Slot i spans [bounds[i], bounds[i+1]) minus the literal that follows it.
  std::vector<std::string> captures(slots_.size());
  const std::size_t min_len = allow_empty ? 0 : 1;

  // Recursive greedy search: slot i takes the longest span that still lets
  // the remaining literals and slots match.
  auto solve = [&](auto&& self, std::size_t slot, std::size_t pos) -> bool {
    if (slot + 1 == slots_.size()) {
      if (slot_end < pos || slot_end - pos < min_len) return false;
      captures[slot] = join(words.subspan(pos, slot_end - pos), " ");
      return true;
    }
    const auto& next = literals_[slot + 1];
    if (slot_end < pos + next.size()) return false;
    for (std::size_t lit = slot_end - next.size() + 1; lit-- > pos;) {
      if (lit - pos < min_len) break;
      if (!literal_at(words, lit, next)) continue;
      if (self(self, slot + 1, lit + next.size())) {
        captures[slot] = join(words.subspan(pos, lit - pos), " ");
        return true;
      }
    }
    return false;
  };
  if (!solve(solve, 0, head.size())) return std::nullopt;
  return captures;
}

std::string SkillTemplate::render(std::span<const std::string> args) const {
  std::vector<std::string> words;
  for (std::size_t i = 0; i < literals_.size(); ++i) {
    words.insert(words.end(), literals_[i].begin(), literals_[i].end());
    if (i < slots_.size()) words.push_back(i < args.size() ? args[i] : "");
  }
  return join(words, " ") + ".";
}

// -- SkillGrammar ----------------------------------------------------------------

SkillGrammar SkillGrammar::default_grammar() {
  static constexpr std::array<std::string_view, 9> kPatterns = {
      "Put [object] on [location].",
      "Put [object] into [location].",
      "Pick up [object] and pour into [location].",
      "Pick up [object].",
      "Open [object].",
      "Push [object].",
      "Pour into [location].",
      "Place on [location].",
      "Place into [location].",
  };
  std::vector<SkillTemplate> templates;
  for (std::string_view pattern : kPatterns) {
    templates.push_back(SkillTemplate::parse(pattern).value());
  }
  return SkillGrammar(std::move(templates));
}

Expected<SkillGrammar, std::string> SkillGrammar::parse(std::string_view text) {
  std::vector<SkillTemplate> templates;
  std::size_t line_no = 0;
  for (const std::string& raw : text::split_lines(text)) {
    ++line_no;
    std::string line = strip_comment(raw);
    if (line.empty()) continue;
    std::string verb;
    std::string pattern = line;
    if (line.rfind("verb=", 0) == 0) {
      auto bar = line.find('|');
      if (bar == std::string::npos) {
        return "line " + std::to_string(line_no) + ": verb= needs '|' separator";
      }
      verb = text::trim(std::string_view(line).substr(5, bar - 5));
      pattern = text::trim(std::string_view(line).substr(bar + 1));
    }
    auto parsed = SkillTemplate::parse(pattern, verb);
    if (!parsed) return "line " + std::to_string(line_no) + ": " + parsed.error();
    templates.push_back(std::move(parsed).value());
  }
  try {
    return SkillGrammar(std::move(templates));
  } catch (const GrammarError& e) {
    return std::string(e.what());
  }
}

SkillGrammar SkillGrammar::load(const std::filesystem::path& path) {
  auto parsed = parse(read_file(path));
  if (!parsed) throw GrammarError(path.string() + ": " + parsed.error());
  return std::move(parsed).value();
}

SkillGrammar::SkillGrammar(std::vector<SkillTemplate> templates)
    : templates_(std::move(templates)) {
  if (templates_.empty()) throw GrammarError("grammar has no templates");
  for (std::size_t i = 0; i < templates_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (templates_[i].surface_pattern() == templates_[j].surface_pattern()) {
        throw GrammarError("duplicate template '" +
                           templates_[i].surface_pattern() + "'");
      }
    }
  }
}

const SkillTemplate& SkillGrammar::at(std::size_t template_id) const {
  if (template_id >= templates_.size()) {
    throw GrammarError("template id " + std::to_string(template_id) +
                       " out of range");
  }
  return templates_[template_id];
}

std::optional<std::size_t> SkillGrammar::find(
    std::string_view surface_pattern) const {
  auto probe = SkillTemplate::parse(surface_pattern);
  if (!probe) return std::nullopt;
  for (std::size_t i = 0; i < templates_.size(); ++i) {
    if (templates_[i].surface_pattern() == probe->surface_pattern()) return i;
  }
  return std::nullopt;
}

PlanStep SkillGrammar::make_step(std::size_t template_id,
                                 std::vector<std::string> args) const {
  const SkillTemplate& t = at(template_id);
  if (args.size() != t.slots().size()) {
    throw GrammarError("'" + t.surface_pattern() + "' expects " +
                       std::to_string(t.slots().size()) + " arguments");
  }
  for (std::string& arg : args) {
    arg = text::normalize_space(arg);
    if (arg.empty()) {
      throw GrammarError("empty argument for '" + t.surface_pattern() + "'");
    }
  }
  return PlanStep{template_id, std::move(args)};
}

std::string SkillGrammar::render_step(const PlanStep& step) const {
  return at(step.template_id).render(step.args);
}

std::string SkillGrammar::render_plan(const Plan& plan) const {
  std::string out;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    if (i > 0) out += '\n';
    out += std::to_string(i + 1) + ". " + render_step(plan.steps[i]);
  }
  return out;
}

// -- Ontology -----------------------------------------------------------------

Ontology Ontology::default_ontology() {
  return Ontology({
      {"cup", {"cup", "mug"}},
      {"basket", {"basket", "hamper"}},
      {"box", {"box", "carton"}},
      {"tray", {"tray", "tea tray"}},
      {"mouse pad", {"mouse pad", "mousepad"}},
      {"pen", {"pen", "marker"}},
      {"tape", {"tape", "adhesive tape"}},
      {"teapot", {"teapot", "kettle"}},
      {"pitcher", {"pitcher", "fairness pitcher"}},
      {"drawer", {"drawer", "cabinet drawer"}},
  });
}

Expected<Ontology, std::string> Ontology::parse(std::string_view text) {
  std::vector<Set> sets;
  std::size_t line_no = 0;
  for (const std::string& raw : text::split_lines(text)) {
    ++line_no;
    std::string line = strip_comment(raw);
    if (line.empty()) continue;
    auto colon = line.find(':');
    if (colon == std::string::npos) {
      return "line " + std::to_string(line_no) + ": expected 'name: a, b'";
    }
    Set set{text::trim(std::string_view(line).substr(0, colon)), {}};
    std::string_view rest = std::string_view(line).substr(colon + 1);
    std::size_t start = 0;
    while (start <= rest.size()) {
      auto comma = rest.find(',', start);
      std::string member = text::normalize_space(
          rest.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                             : comma - start));
      if (!member.empty()) set.members.push_back(member);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    sets.push_back(std::move(set));
  }
  try {
    return Ontology(std::move(sets));
  } catch (const GrammarError& e) {
    return std::string(e.what());
  }
}

Ontology Ontology::load(const std::filesystem::path& path) {
  auto parsed = parse(read_file(path));
  if (!parsed) throw GrammarError(path.string() + ": " + parsed.error());
  return std::move(parsed).value();
}

Ontology::Ontology(std::vector<Set> sets) : sets_(std::move(sets)) {
  for (std::size_t i = 0; i < sets_.size(); ++i) {
    if (sets_[i].members.size() < 2) {
      throw GrammarError("ontology set '" + sets_[i].name +
                         "' needs at least two members");
    }
    for (const std::string& member : sets_[i].members) {
      auto& ids = index_[text::casefold(text::normalize_space(member))];
      if (ids.empty() || ids.back() != i) ids.push_back(i);
    }
  }
}

bool Ontology::share_set(std::string_view a, std::string_view b) const {
  auto ia = index_.find(text::casefold(text::normalize_space(a)));
  auto ib = index_.find(text::casefold(text::normalize_space(b)));
  if (ia == index_.end() || ib == index_.end()) return false;
  for (std::size_t set : ia->second) {
    if (std::find(ib->second.begin(), ib->second.end(), set) != ib->second.end()) {
      return true;
    }
  }
  return false;
}

// -- Response template ------------------------------------------------------------

std::string_view to_string(FormatErrorKind kind) {
  switch (kind) {
    case FormatErrorKind::kMissingTag: return "MissingTag";
    case FormatErrorKind::kDuplicateTag: return "DuplicateTag";
    case FormatErrorKind::kTagOrderViolation: return "TagOrderViolation";
    case FormatErrorKind::kTrailingContent: return "TrailingContent";
  }
  return "?";
}

Expected<ResponseParts, FormatError> parse_response(std::string_view text) {
  static constexpr std::array<std::string_view, 4> kTags = {
      "<think>", "</think>", "<answer>", "</answer>"};
  std::array<std::size_t, 4> pos{};
  for (std::size_t t = 0; t < kTags.size(); ++t) {
    std::size_t count = 0;
    for (auto at = text.find(kTags[t]); at != std::string_view::npos;
         at = text.find(kTags[t], at + 1)) {
      if (count == 0) pos[t] = at;
      ++count;
    }
    if (count > 1) {
      return FormatError{FormatErrorKind::kDuplicateTag,
                         std::string(kTags[t]) + " appears " +
                             std::to_string(count) + " times"};
    }
    if (count == 0) {
      return FormatError{FormatErrorKind::kMissingTag,
                         std::string(kTags[t]) + " is missing"};
    }
  }
  for (std::size_t t = 1; t < kTags.size(); ++t) {
    if (pos[t] < pos[t - 1] + kTags[t - 1].size()) {
      return FormatError{FormatErrorKind::kTagOrderViolation,
                         std::string(kTags[t]) + " precedes " +
                             std::string(kTags[t - 1])};
    }
  }
  const std::size_t think_end = pos[1] + kTags[1].size();
  const std::size_t answer_end = pos[3] + kTags[3].size();
  if (!text::is_blank(text.substr(0, pos[0])) ||
      !text::is_blank(text.substr(think_end, pos[2] - think_end)) ||
      !text::is_blank(text.substr(answer_end))) {
    return FormatError{FormatErrorKind::kTrailingContent,
                       "non-whitespace text outside the tag blocks"};
  }
  const std::size_t think_begin = pos[0] + kTags[0].size();
  const std::size_t answer_begin = pos[2] + kTags[2].size();
  return ResponseParts{
      text::trim(text.substr(think_begin, pos[1] - think_begin)),
      text::trim(text.substr(answer_begin, pos[3] - answer_begin))};
}

std::optional<std::string> extract_answer(std::string_view text) {
  auto open = text.find("<answer>");
  if (open == std::string_view::npos) return std::nullopt;
  open += 8;
  auto close = text.find("</answer>", open);
  if (close == std::string_view::npos) return std::nullopt;
  return text::trim(text.substr(open, close - open));
}

// -- Plan parsing -------------------------------------------------------------

std::string_view to_string(StepErrorKind kind) {
  switch (kind) {
    case StepErrorKind::kUnnumberedLine: return "UnnumberedLine";
    case StepErrorKind::kNonconsecutiveNumbering: return "NonconsecutiveNumbering";
    case StepErrorKind::kNoTemplateMatch: return "NoTemplateMatch";
    case StepErrorKind::kAmbiguousTemplateMatch: return "AmbiguousTemplateMatch";
    case StepErrorKind::kEmptySlot: return "EmptySlot";
  }
  return "?";
}

std::string StepParseError::describe() const {
  std::string out = std::string(to_string(kind)) + " at line " +
                    std::to_string(line_number) + ": '" + line + "'";
  if (!slot.empty()) out += " (slot " + slot + ")";
  return out;
}

Expected<PlanStep, StepParseError> parse_step(std::string_view step_text,
                                              const SkillGrammar& grammar) {
  std::vector<std::string> words = text::split_words(step_text);
  drop_final_period(words);
  const std::string line = text::trim(step_text);

  std::vector<std::size_t> best;
  std::size_t best_literals = 0;
  std::vector<std::vector<std::string>> best_args;
  for (std::size_t id = 0; id < grammar.size(); ++id) {
    const SkillTemplate& t = grammar.at(id);
    auto args = t.match(words);
    if (!args) continue;
    const std::size_t literals = t.literal_word_count();
    if (best.empty() || literals > best_literals) {
      best.clear();
      best_args.clear();
      best_literals = literals;
    }
    if (literals == best_literals) {
      best.push_back(id);
      best_args.push_back(std::move(*args));
    }
  }
  if (best.size() == 1) return PlanStep{best.front(), std::move(best_args.front())};
  if (best.size() > 1) {
    return StepParseError{StepErrorKind::kAmbiguousTemplateMatch, 0, line, {}};
  }
  for (std::size_t id = 0; id < grammar.size(); ++id) {
    const SkillTemplate& t = grammar.at(id);
    auto args = t.match(words, /*allow_empty=*/true);
    if (!args) continue;
    for (std::size_t s = 0; s < args->size(); ++s) {
      if ((*args)[s].empty()) {
        return StepParseError{StepErrorKind::kEmptySlot, 0, line,
                              std::string(to_string(t.slots()[s]))};
      }
    }
  }
  return StepParseError{StepErrorKind::kNoTemplateMatch, 0, line, {}};
}

Expected<Plan, std::vector<StepParseError>> parse_plan(
    std::string_view answer, const SkillGrammar& grammar) {
  Plan plan;
  std::vector<StepParseError> errors;
  std::size_t previous_number = 0;
  std::size_t line_no = 0;
  for (const std::string& raw : text::split_lines(answer)) {
    ++line_no;
    if (text::is_blank(raw)) continue;
    const std::string line = text::trim(raw);

    std::size_t digits = 0;
    while (digits < line.size() && line[digits] >= '0' && line[digits] <= '9') {
      ++digits;
    }
    if (digits == 0 || digits > 9 || digits >= line.size() || line[digits] != '.') {
      errors.push_back({StepErrorKind::kUnnumberedLine, line_no, line, {}});
      continue;
    }
    const std::size_t number = std::stoul(line.substr(0, digits));
    if (number != previous_number + 1) {
      errors.push_back({StepErrorKind::kNonconsecutiveNumbering, line_no, line, {}});
    }
    previous_number = number;

    auto step = parse_step(std::string_view(line).substr(digits + 1), grammar);
    if (!step) {
      StepParseError error = step.error();
      error.line_number = line_no;
      error.line = line;
      errors.push_back(std::move(error));
      continue;
    }
    plan.steps.push_back(std::move(step).value());
  }
  if (!errors.empty()) return errors;
  return plan;
}

// -- Prompts -------------------------------------------------------------------

std::string render_prompt(PromptKind kind, const SkillGrammar& grammar,
                          std::string_view instruction) {
  std::string out;
  if (kind == PromptKind::kPlanning) {
    out += kPlanningHead;
    for (const SkillTemplate& t : grammar.templates()) {
      out += "- " + t.surface_pattern() + "\n";
    }
    out += "\nThe user request is: ";
    out += instruction;
    out += "\n";
    out += kPlanningTail;
  } else {
    out += kCompletionHead;
    out += "# ";
    out += instruction;
    out += " #\n";
    out += kCompletionTail;
  }
  return out;
}

}  // namespace rever
