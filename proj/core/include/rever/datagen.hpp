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

#ifndef REVER_DATAGEN_HPP_
#define REVER_DATAGEN_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rever/grammar.hpp"
#include "rever/random.hpp"
#include "rever/reward.hpp"

namespace rever {

class InfeasibleComposition : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One recorded demonstration of a skill. Keyframes are opaque references
// (paths or URIs) that are never decoded here.
struct SkillDemo {
  std::string demo_id;
  PlanStep step;
  std::string init_ref;
  std::string mid_ref;  // frame from the middle of execution, for negatives
  std::string final_ref;
};

struct TaskSpec {
  std::string task_id;
  std::string instruction;
  std::vector<SkillDemo> sequence;

  std::size_t k() const { return sequence.size(); }
  Plan plan() const;
};

enum class HandRequirement { kAny, kEmpty, kHolding };
enum class HandEffect { kNone, kHold, kRelease };

struct CompositionRule {
  HandRequirement requirement = HandRequirement::kAny;
  HandEffect effect = HandEffect::kNone;
};

// Which skills may follow which, expressed through a single "held object"
// state. Skills without a rule are unconstrained.
class ConstraintTable {
 public:
  static ConstraintTable default_table(const SkillGrammar& grammar);
  // "<surface pattern> | requires=<any|empty|holding> | effect=<none|hold|release>"
  static Expected<ConstraintTable, std::string> parse(std::string_view text,
                                                      const SkillGrammar& grammar);
  static ConstraintTable load(const std::filesystem::path& path,
                              const SkillGrammar& grammar);

  void set(std::size_t template_id, CompositionRule rule);
  CompositionRule rule(std::size_t template_id) const;

  // True if the whole sequence is executable from an empty hand.
  bool admits(std::span<const SkillDemo> sequence) const;

 private:
  std::vector<CompositionRule> rules_;
};

// Instruction templates keyed by the objects a task touches.
class InstructionPool {
 public:
  struct Entry {
    std::vector<std::string> objects;  // empty means wildcard
    std::string instruction;
  };

  static InstructionPool default_pool();
  // "<obj1, obj2, ... | *> | <instruction>" per line.
  static Expected<InstructionPool, std::string> parse(std::string_view text);
  static InstructionPool load(const std::filesystem::path& path);

  explicit InstructionPool(std::vector<Entry> entries);

  // Uniform pick among entries covering every object argument of the
  // sequence; wildcard entries are the fallback.
  std::string pick(std::span<const SkillDemo> sequence,
                   const SkillGrammar& grammar, Rng& rng) const;

 private:
  std::vector<Entry> entries_;
};

// A small tabletop library for the default grammar (25 distinct steps).
std::vector<SkillDemo> default_library(const SkillGrammar& grammar);

// Line-delimited JSON: {"demo_id","step","init","mid","final"}.
std::vector<SkillDemo> load_library(const std::filesystem::path& path,
                                    const SkillGrammar& grammar);
void save_library(std::span<const SkillDemo> library,
                  const std::filesystem::path& path, const SkillGrammar& grammar);

// Draws k distinct demos forming an admissible sequence. Throws
// InfeasibleComposition when no such sequence exists.
TaskSpec compose_task(std::span<const SkillDemo> library, std::size_t k,
                      const InstructionPool& pool,
                      const ConstraintTable& constraints,
                      const SkillGrammar& grammar, Rng& rng,
                      std::string task_id);

struct SynthesisConfig {
  std::size_t count = 100;
  std::size_t k_min = 2;
  std::size_t k_max = 4;
  std::uint64_t seed = 0;
  std::string task_prefix = "task";
};

// Task i uses its own generator seeded from (seed, i), so output does not
// depend on how tasks are scheduled.
std::vector<TaskSpec> synthesize_tasks(std::span<const SkillDemo> library,
                                       const SynthesisConfig& cfg,
                                       const InstructionPool& pool,
                                       const ConstraintTable& constraints,
                                       const SkillGrammar& grammar);

struct Triplet {
  std::string task_id;
  TaskType task_type = TaskType::kPlan;
  std::string q;
  std::vector<std::string> observations;
  std::string y;  // rendered plan, or "True"/"False"
  std::string grammar_ref = "default";
  std::string tag;  // optional dataset tag used to group evaluations

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

// One planning triplet plus, per sub-task, one positive (init, final) and
// `negatives_per_subtask` negative (init, mid) completion triplets.
std::vector<Triplet> make_triplets(const TaskSpec& task,
                                   const SkillGrammar& grammar,
                                   const std::string& grammar_ref = "default",
                                   std::size_t negatives_per_subtask = 1);

}  // namespace rever

#endif  // REVER_DATAGEN_HPP_
