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

#include "rever/datagen.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "rever/text.hpp"

namespace rever {
namespace {

using json = nlohmann::ordered_json;

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string strip_comment(std::string_view line) {
  auto hash = line.find('#');
  return text::trim(hash == std::string_view::npos ? line : line.substr(0, hash));
}

std::vector<std::string> split_bar(std::string_view line) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    auto bar = line.find('|', start);
    parts.push_back(text::trim(line.substr(
        start, bar == std::string_view::npos ? std::string_view::npos : bar - start)));
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  return parts;
}

// Object-slot arguments of a sequence, casefolded.
std::vector<std::string> touched_objects(std::span<const SkillDemo> sequence,
                                         const SkillGrammar& grammar) {
  std::vector<std::string> objects;
  for (const SkillDemo& demo : sequence) {
    const auto& slots = grammar.at(demo.step.template_id).slots();
    for (std::size_t s = 0; s < slots.size(); ++s) {
      if (slots[s] == SlotKind::kObject) {
        objects.push_back(text::casefold(demo.step.args[s]));
      }
    }
  }
  return objects;
}

struct HandState {
  bool holding = false;
};

bool apply_rule(const CompositionRule& rule, HandState& hand) {
  if (rule.requirement == HandRequirement::kEmpty && hand.holding) return false;
  if (rule.requirement == HandRequirement::kHolding && !hand.holding) return false;
  if (rule.effect == HandEffect::kHold) hand.holding = true;
  if (rule.effect == HandEffect::kRelease) hand.holding = false;
  return true;
}

}  // namespace

Plan TaskSpec::plan() const {
  Plan plan;
  for (const SkillDemo& demo : sequence) plan.steps.push_back(demo.step);
  return plan;
}

// -- ConstraintTable -------------------------------------------------------------

ConstraintTable ConstraintTable::default_table(const SkillGrammar& grammar) {
  ConstraintTable table;
  auto set = [&](std::string_view pattern, HandRequirement req, HandEffect eff) {
    if (auto id = grammar.find(pattern)) table.set(*id, {req, eff});
  };
  using R = HandRequirement;
  using E = HandEffect;
  set("Put [object] on [location].", R::kEmpty, E::kNone);
  set("Put [object] into [location].", R::kEmpty, E::kNone);
  set("Pick up [object] and pour into [location].", R::kEmpty, E::kNone);
  set("Pick up [object].", R::kEmpty, E::kHold);
  set("Open [object].", R::kEmpty, E::kNone);
  set("Push [object].", R::kEmpty, E::kNone);
  set("Pour into [location].", R::kHolding, E::kNone);
  set("Place on [location].", R::kHolding, E::kRelease);
  set("Place into [location].", R::kHolding, E::kRelease);
  return table;
}

Expected<ConstraintTable, std::string> ConstraintTable::parse(
    std::string_view text, const SkillGrammar& grammar) {
  ConstraintTable table;
  std::size_t line_no = 0;
  for (const std::string& raw : text::split_lines(text)) {
    ++line_no;
    const std::string line = strip_comment(raw);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    auto parts = split_bar(line);
    auto id = grammar.find(parts.front());
    if (!id) return where + "unknown template '" + parts.front() + "'";
    CompositionRule rule;
    for (std::size_t i = 1; i < parts.size(); ++i) {
      const std::string& field = parts[i];
      if (field == "requires=any") rule.requirement = HandRequirement::kAny;
      else if (field == "requires=empty") rule.requirement = HandRequirement::kEmpty;
      else if (field == "requires=holding") rule.requirement = HandRequirement::kHolding;
      else if (field == "effect=none") rule.effect = HandEffect::kNone;
      else if (field == "effect=hold") rule.effect = HandEffect::kHold;
      else if (field == "effect=release") rule.effect = HandEffect::kRelease;
      else return where + "unknown field '" + field + "'";
    }
    table.set(*id, rule);
  }
  return table;
}

ConstraintTable ConstraintTable::load(const std::filesystem::path& path,
                                      const SkillGrammar& grammar) {
  auto parsed = parse(read_text(path), grammar);
  if (!parsed) throw std::runtime_error(path.string() + ": " + parsed.error());
  return std::move(parsed).value();
}

void ConstraintTable::set(std::size_t template_id, CompositionRule rule) {
  if (rules_.size() <= template_id) rules_.resize(template_id + 1);
  rules_[template_id] = rule;
}

CompositionRule ConstraintTable::rule(std::size_t template_id) const {
  return template_id < rules_.size() ? rules_[template_id] : CompositionRule{};
}

bool ConstraintTable::admits(std::span<const SkillDemo> sequence) const {
  HandState hand;
  for (const SkillDemo& demo : sequence) {
    if (!apply_rule(rule(demo.step.template_id), hand)) return false;
  }
  return true;
}

// -- InstructionPool -------------------------------------------------------------

InstructionPool InstructionPool::default_pool() {
  return InstructionPool({
      {{"apple", "banana", "orange"}, "Put all the fruits into the basket"},
      {{"apple", "orange"}, "Put all round objects into the basket"},
      {{"pen", "tape"}, "Organize all stationery (pens and tapes)"},
      {{"teapot", "pitcher", "teacup", "lid"}, "Make me a cup of tea"},
      {{"teacup", "lid"}, "Make tea and cover the cup with the lid"},
      {{}, "Tidy the small objects into their containers"},
      {{}, "Tidy up the small items on the desktop"},
  });
}

Expected<InstructionPool, std::string> InstructionPool::parse(std::string_view text) {
  std::vector<Entry> entries;
  std::size_t line_no = 0;
  for (const std::string& raw : text::split_lines(text)) {
    ++line_no;
    const std::string line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto bar = line.find('|');
    if (bar == std::string::npos) {
      return "line " + std::to_string(line_no) + ": expected '<objects> | <instruction>'";
    }
    Entry entry;
    const std::string condition = text::trim(std::string_view(line).substr(0, bar));
    entry.instruction = text::trim(std::string_view(line).substr(bar + 1));
    if (entry.instruction.empty()) {
      return "line " + std::to_string(line_no) + ": empty instruction";
    }
    if (condition != "*") {
      std::stringstream ss(condition);
      std::string item;
      while (std::getline(ss, item, ',')) {
        item = text::normalize_space(item);
        if (!item.empty()) entry.objects.push_back(item);
      }
      if (entry.objects.empty()) {
        return "line " + std::to_string(line_no) + ": empty object list";
      }
    }
    entries.push_back(std::move(entry));
  }
  if (entries.empty()) return std::string("instruction pool is empty");
  return InstructionPool(std::move(entries));
}

InstructionPool InstructionPool::load(const std::filesystem::path& path) {
  auto parsed = parse(read_text(path));
  if (!parsed) throw std::runtime_error(path.string() + ": " + parsed.error());
  return std::move(parsed).value();
}

InstructionPool::InstructionPool(std::vector<Entry> entries)
    : entries_(std::move(entries)) {
  for (Entry& entry : entries_) {
    for (std::string& object : entry.objects) object = text::casefold(object);
  }
}

std::string InstructionPool::pick(std::span<const SkillDemo> sequence,
                                  const SkillGrammar& grammar, Rng& rng) const {
  const std::vector<std::string> objects = touched_objects(sequence, grammar);
  std::vector<const Entry*> specific;
  std::vector<const Entry*> wildcard;
  for (const Entry& entry : entries_) {
    if (entry.objects.empty()) {
      wildcard.push_back(&entry);
      continue;
    }
    if (objects.empty()) continue;
    const bool covered = std::all_of(objects.begin(), objects.end(), [&](const auto& o) {
      return std::find(entry.objects.begin(), entry.objects.end(), o) !=
             entry.objects.end();
    });
    if (covered) specific.push_back(&entry);
  }
  const auto& candidates = specific.empty() ? wildcard : specific;
  if (candidates.empty()) {
    throw InfeasibleComposition("no instruction template covers the task");
  }
  return candidates[rng.below(candidates.size())]->instruction;
}

// -- Library -------------------------------------------------------------------

std::vector<SkillDemo> default_library(const SkillGrammar& grammar) {
  static constexpr std::string_view kSteps[] = {
      "Pick up apple.",
      "Pick up banana.",
      "Pick up orange.",
      "Pick up pen.",
      "Pick up tape.",
      "Pick up teapot.",
      "Place into basket.",
      "Place into box.",
      "Place on tray.",
      "Place on mouse pad.",
      "Put apple into basket.",
      "Put banana into basket.",
      "Put orange into basket.",
      "Put pen into box.",
      "Put tape into box.",
      "Put teacup on tray.",
      "Put lid on teacup.",
      "Put apple on tray.",
      "Pour into teacup.",
      "Pick up teapot and pour into pitcher.",
      "Pick up pitcher and pour into teacup.",
      "Open box.",
      "Open drawer.",
      "Push drawer.",
      "Push box.",
  };
  std::vector<SkillDemo> library;
  std::size_t index = 0;
  for (std::string_view step : kSteps) {
    auto parsed = parse_step(step, grammar);
    if (!parsed) continue;
    char id[32];
    std::snprintf(id, sizeof(id), "demo-%03zu", index++);
    const std::string base = std::string("umi://demos/") + id;
    library.push_back(SkillDemo{id, std::move(parsed).value(), base + "/init.jpg",
                                base + "/mid.jpg", base + "/final.jpg"});
  }
  return library;
}

std::vector<SkillDemo> load_library(const std::filesystem::path& path,
                                    const SkillGrammar& grammar) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<SkillDemo> library;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::is_blank(line)) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no) + ": ";
    try {
      const json record = json::parse(line);
      SkillDemo demo;
      demo.demo_id = record.at("demo_id").get<std::string>();
      auto step = parse_step(record.at("step").get<std::string>(), grammar);
      if (!step) throw std::runtime_error(step.error().describe());
      demo.step = std::move(step).value();
      demo.init_ref = record.at("init").get<std::string>();
      demo.mid_ref = record.at("mid").get<std::string>();
      demo.final_ref = record.at("final").get<std::string>();
      if (demo.init_ref == demo.mid_ref || demo.init_ref == demo.final_ref ||
          demo.mid_ref == demo.final_ref) {
        throw std::runtime_error("keyframe references must be distinct");
      }
      library.push_back(std::move(demo));
    } catch (const std::exception& e) {
      throw std::runtime_error(where + e.what());
    }
  }
  return library;
}

void save_library(std::span<const SkillDemo> library,
                  const std::filesystem::path& path, const SkillGrammar& grammar) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const SkillDemo& demo : library) {
    json record;
    record["demo_id"] = demo.demo_id;
    record["step"] = grammar.render_step(demo.step);
    record["init"] = demo.init_ref;
    record["mid"] = demo.mid_ref;
    record["final"] = demo.final_ref;
    out << record.dump() << '\n';
  }
}

// -- Composition ---------------------------------------------------------------

TaskSpec compose_task(std::span<const SkillDemo> library, std::size_t k,
                      const InstructionPool& pool,
                      const ConstraintTable& constraints,
                      const SkillGrammar& grammar, Rng& rng,
                      std::string task_id) {
  if (k == 0) throw std::invalid_argument("compose_task needs k >= 1");
  if (library.size() < k) {
    throw InfeasibleComposition("library has fewer than " + std::to_string(k) +
                                " demos");
  }
  std::vector<std::size_t> chosen;
  std::vector<char> used(library.size(), 0);

  // Randomized depth-first search; exhaustive, so failure means infeasible.
  auto search = [&](auto&& self, HandState hand) -> bool {
    if (chosen.size() == k) return true;
    std::vector<std::size_t> order(library.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t i : order) {
      if (used[i]) continue;
      HandState next = hand;
      if (!apply_rule(constraints.rule(library[i].step.template_id), next)) continue;
      used[i] = 1;
      chosen.push_back(i);
      if (self(self, next)) return true;
      chosen.pop_back();
      used[i] = 0;
    }
    return false;
  };
  if (!search(search, HandState{})) {
    throw InfeasibleComposition("no admissible sequence of " + std::to_string(k) +
                                " skills in the library");
  }

  TaskSpec task;
  task.task_id = std::move(task_id);
  for (std::size_t i : chosen) task.sequence.push_back(library[i]);
  task.instruction = pool.pick(task.sequence, grammar, rng);
  return task;
}

std::vector<TaskSpec> synthesize_tasks(std::span<const SkillDemo> library,
                                       const SynthesisConfig& cfg,
                                       const InstructionPool& pool,
                                       const ConstraintTable& constraints,
                                       const SkillGrammar& grammar) {
  if (cfg.k_min == 0 || cfg.k_min > cfg.k_max) {
    throw std::invalid_argument("need 1 <= k_min <= k_max");
  }
  std::vector<TaskSpec> tasks;
  tasks.reserve(cfg.count);
  for (std::size_t i = 0; i < cfg.count; ++i) {
    Rng rng(Rng::derive(cfg.seed, i));
    const std::size_t k = cfg.k_min + rng.below(cfg.k_max - cfg.k_min + 1);
    char id[64];
    std::snprintf(id, sizeof(id), "%s-%06zu", cfg.task_prefix.c_str(), i);
    tasks.push_back(compose_task(library, k, pool, constraints, grammar, rng, id));
  }
  return tasks;
}

std::vector<Triplet> make_triplets(const TaskSpec& task,
                                   const SkillGrammar& grammar,
                                   const std::string& grammar_ref,
                                   std::size_t negatives_per_subtask) {
  if (task.sequence.empty()) throw std::invalid_argument("task has no sub-tasks");
  std::vector<Triplet> out;
  out.push_back(Triplet{task.task_id, TaskType::kPlan,
                        render_prompt(PromptKind::kPlanning, grammar, task.instruction),
                        {task.sequence.front().init_ref},
                        grammar.render_plan(task.plan()),
                        grammar_ref,
                        {}});
  for (const SkillDemo& demo : task.sequence) {
    const std::string q = render_prompt(PromptKind::kCompletion, grammar,
                                        grammar.render_step(demo.step));
    out.push_back(Triplet{task.task_id, TaskType::kCompletion, q,
                          {demo.init_ref, demo.final_ref}, "True", grammar_ref, {}});
    for (std::size_t n = 0; n < negatives_per_subtask; ++n) {
      out.push_back(Triplet{task.task_id, TaskType::kCompletion, q,
                            {demo.init_ref, demo.mid_ref}, "False", grammar_ref, {}});
    }
  }
  return out;
}

}  // namespace rever
