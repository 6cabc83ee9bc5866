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

#ifndef REVER_CLI_COMMANDS_HPP_
#define REVER_CLI_COMMANDS_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rever/datagen.hpp"
#include "rever/dataset.hpp"
#include "rever/grammar.hpp"
#include "rever/reward.hpp"
#include "rever/selfcheck.hpp"
#include "rever/trainer.hpp"

namespace rever::cli {

enum ExitCode : int { kExitOk = 0, kExitInvalid = 1, kExitCheckFailed = 2 };

// Bad input or configuration; maps to kExitInvalid.
class CliError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GlobalOptions {
  std::string grammar_path;   // empty: built-in grammar
  std::string ontology_path;  // empty: built-in ontology
  std::string weights_path;   // empty: default weights
  std::uint64_t seed = 0;
  std::string out;            // empty: stdout
};

struct Context {
  SkillGrammar grammar = SkillGrammar::default_grammar();
  Ontology ontology = Ontology::default_ontology();
  RewardWeights weights;
  std::uint64_t seed = 0;
  // Written into synthesized records.
  std::string grammar_ref = "default";
};

Context load_context(const GlobalOptions& options);

// {"w_f", "w_c", "w_a", "w_o", "w_l"}; missing keys keep their defaults.
RewardWeights parse_weights(std::string_view json_text);

// Resolves grammar_ref / ontology_ref values from scoring records. "" and
// "default" mean the context's grammar/ontology; anything else is a file
// path, relative paths taken from `base_dir`. Loaded files are cached.
class ResourceCache {
 public:
  ResourceCache(const Context& context, std::filesystem::path base_dir);
  const SkillGrammar& grammar(const std::string& ref);
  const Ontology& ontology(const std::string& ref);

 private:
  const Context& context_;
  std::filesystem::path base_dir_;
  std::map<std::string, std::unique_ptr<SkillGrammar>> grammars_;
  std::map<std::string, std::unique_ptr<Ontology>> ontologies_;
};

// -- score ---------------------------------------------------------------------

struct ScoreRecord {
  std::string id;
  TaskType task_type = TaskType::kPlan;
  std::string response_text;
  std::string ground_truth;
  std::string grammar_ref = "default";
  std::string ontology_ref = "default";
};

// Throws MalformedRecord with the 1-based line number.
ScoreRecord parse_score_record(std::string_view line, std::size_t line_number);

RewardBreakdown score_record(const ScoreRecord& record, ResourceCache& resources,
                             const RewardWeights& weights, std::size_t line_number);

// Output object: id, task_type, format, bm, length_penalty, content, total,
// matching [[generated, ground_truth, weight], ...], diagnostics.
std::string breakdown_to_json(const std::string& id, const RewardBreakdown& breakdown);

// One output line per non-blank input line, in input order.
void score_stream(std::istream& in, std::ostream& out, ResourceCache& resources,
                  const RewardWeights& weights);

// -- eval ----------------------------------------------------------------------

struct Prediction {
  std::string id;
  std::string response_text;
};

// {"id", "response_text"} per line. Throws MalformedRecord.
std::vector<Prediction> read_predictions(std::istream& in);

class MissingPrediction : public std::runtime_error {
 public:
  explicit MissingPrediction(const std::string& id)
      : std::runtime_error("no prediction for task '" + id + "'") {}
};

class UnknownId : public std::runtime_error {
 public:
  explicit UnknownId(const std::string& id)
      : std::runtime_error("prediction id '" + id + "' is not a planning task") {}
};

struct EvalRecord {
  std::string id;
  std::string tag;
  RewardBreakdown breakdown;
};

struct EvalAggregate {
  std::size_t count = 0;
  double mean_bm = 0.0;
  double mean_content = 0.0;
  double mean_total = 0.0;
  double format_pass_rate = 0.0;
};

struct EvalReport {
  std::vector<EvalRecord> records;  // dataset order
  std::map<std::string, EvalAggregate> by_tag;
  EvalAggregate overall;
};

// Joins predictions to the planning triplets by task_id. Untagged triplets
// fall under "all".
EvalReport evaluate(std::span<const Prediction> predictions,
                    std::span<const Triplet> dataset, ResourceCache& resources,
                    const RewardWeights& weights);

EvalAggregate aggregate(std::span<const EvalRecord> records);

std::string eval_report_json(const EvalReport& report);

// -- synthesize ----------------------------------------------------------------

struct SynthesizeOptions {
  std::string library_path;       // empty: built-in library
  std::string constraints_path;   // empty: built-in table
  std::string instructions_path;  // empty: built-in pool
  std::size_t count = 100;
  std::size_t k_min = 2;
  std::size_t k_max = 4;
  std::size_t negatives_per_subtask = 1;
  std::string tag;
  bool split = false;
};

struct SynthesizeResult {
  std::vector<Triplet> triplets;
  std::optional<DatasetSplit> split;
};

SynthesizeResult synthesize(const SynthesizeOptions& options, const Context& context);

// "<dir>/<stem>.train.jsonl" and "<dir>/<stem>.test.jsonl" next to `out`.
std::pair<std::filesystem::path, std::filesystem::path> split_paths(
    const std::filesystem::path& out);

// -- train-toy -----------------------------------------------------------------

struct ToyRunConfig {
  GrpoConfig grpo;
  RewardWeights weights;
  std::string tasks_path;  // dataset file; empty: synthesize
  SynthesisConfig synthesis;
  std::size_t vocabulary_size = 40;
};

// GrpoConfig fields by name plus "optimizer" ("adam" | "sgd"), "weights"
// (same keys as the weights file), "tasks" (dataset path) or "synthesize"
// ({"count", "k_min", "k_max", "seed"}), and "vocabulary_size". Seeds and
// weights not given in the file come from `context`.
ToyRunConfig parse_toy_config(std::string_view json_text, const Context& context);

struct ToyRun {
  std::vector<ToyTask> tasks;
  std::vector<PlanStep> vocabulary;
  TrainReport report;
};

// Relative "tasks" paths are taken from `base_dir`.
ToyRun run_toy(const ToyRunConfig& config, const Context& context,
               const std::filesystem::path& base_dir);

std::string step_record_json(const TrainStepRecord& record);
std::string toy_summary_json(const ToyRun& run, const SkillGrammar& grammar);

// -- selfcheck -----------------------------------------------------------------

// One line per suite, "PASS <name> (<cases> cases)" or "FAIL <name>: ...".
std::string format_selfcheck(const SelfcheckReport& report);

}  // namespace rever::cli

#endif  // REVER_CLI_COMMANDS_HPP_
