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

#include "rever/cli/commands.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "rever/dataset.hpp"
#include "rever/text.hpp"

namespace rever::cli {
namespace {

using json = nlohmann::ordered_json;

double num(double v) { return text::round_sig9(v); }

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(std::string_view text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw CliError(what + ": " + e.what());
  }
}

const std::string& string_field(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw MalformedRecord(line, std::string("missing field '") + key + "'");
  if (!it->is_string()) {
    throw MalformedRecord(line, std::string("field '") + key + "' must be a string");
  }
  return it->get_ref<const std::string&>();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& ref) {
  std::filesystem::path p(ref);
  return p.is_absolute() || base.empty() ? p : base / p;
}

void apply_weights(const json& obj, RewardWeights& w) {
  static const std::set<std::string> kKeys = {"w_f", "w_c", "w_a", "w_o", "w_l"};
  if (!obj.is_object()) throw CliError("weights must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    if (!kKeys.count(key)) throw CliError("unknown weight '" + key + "'");
    if (!value.is_number()) throw CliError("weight '" + key + "' must be a number");
  }
  w.format = obj.value("w_f", w.format);
  w.content = obj.value("w_c", w.content);
  w.action = obj.value("w_a", w.action);
  w.object = obj.value("w_o", w.object);
  w.length = obj.value("w_l", w.length);
  try {
    w.validate();
  } catch (const std::invalid_argument& e) {
    throw CliError(std::string("weights: ") + e.what());
  }
}

json aggregate_json(const EvalAggregate& a) {
  return json{{"count", a.count},
              {"mean_bm", num(a.mean_bm)},
              {"mean_content", num(a.mean_content)},
              {"mean_total", num(a.mean_total)},
              {"format_pass_rate", num(a.format_pass_rate)}};
}

json breakdown_object(const std::string& id, const RewardBreakdown& b) {
  json pairs = json::array();
  for (const MatchedPair& p : b.matching.pairs) {
    pairs.push_back(json::array({p.generated, p.ground_truth, num(p.weight)}));
  }
  json o;
  o["id"] = id;
  o["task_type"] = std::string(to_string(b.task_type));
  o["format"] = b.format;
  o["bm"] = num(b.bm);
  o["length_penalty"] = num(b.length_penalty);
  o["content"] = num(b.content);
  o["total"] = num(b.total);
  o["matching"] = std::move(pairs);
  o["diagnostics"] = b.diagnostics;
  return o;
}

Plan parse_ground_truth(const std::string& text, const SkillGrammar& grammar,
                        std::size_t line) {
  auto plan = parse_plan(text, grammar);
  if (!plan) {
    throw MalformedRecord(line, "ground truth: " + plan.error().front().describe());
  }
  if (plan->empty()) throw MalformedRecord(line, "ground truth plan is empty");
  return std::move(plan).value();
}

}  // namespace

RewardWeights parse_weights(std::string_view json_text) {
  RewardWeights w;
  apply_weights(parse_json(json_text, "weights"), w);
  return w;
}

Context load_context(const GlobalOptions& options) {
  Context ctx;
  ctx.seed = options.seed;
  try {
    if (!options.grammar_path.empty()) {
      ctx.grammar = SkillGrammar::load(options.grammar_path);
      ctx.grammar_ref = options.grammar_path;
    }
    if (!options.ontology_path.empty()) {
      ctx.ontology = Ontology::load(options.ontology_path);
    }
  } catch (const std::exception& e) {
    throw CliError(e.what());
  }
  if (!options.weights_path.empty()) {
    ctx.weights = parse_weights(read_text(options.weights_path));
  }
  return ctx;
}

// -- ResourceCache ----------------------------------------------------------------

ResourceCache::ResourceCache(const Context& context, std::filesystem::path base_dir)
    : context_(context), base_dir_(std::move(base_dir)) {}

const SkillGrammar& ResourceCache::grammar(const std::string& ref) {
  if (ref.empty() || ref == "default") return context_.grammar;
  auto& slot = grammars_[ref];
  if (!slot) {
    try {
      slot = std::make_unique<SkillGrammar>(SkillGrammar::load(resolve(base_dir_, ref)));
    } catch (const std::exception& e) {
      grammars_.erase(ref);
      throw CliError("grammar_ref '" + ref + "': " + e.what());
    }
  }
  return *slot;
}

const Ontology& ResourceCache::ontology(const std::string& ref) {
  if (ref.empty() || ref == "default") return context_.ontology;
  auto& slot = ontologies_[ref];
  if (!slot) {
    try {
      slot = std::make_unique<Ontology>(Ontology::load(resolve(base_dir_, ref)));
    } catch (const std::exception& e) {
      ontologies_.erase(ref);
      throw CliError("ontology_ref '" + ref + "': " + e.what());
    }
  }
  return *slot;
}

// -- score -------------------------------------------------------------------------

ScoreRecord parse_score_record(std::string_view line, std::size_t line_number) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::exception& e) {
    throw MalformedRecord(line_number, std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw MalformedRecord(line_number, "record must be an object");
  ScoreRecord r;
  r.id = string_field(obj, "id", line_number);
  const std::string& type = string_field(obj, "task_type", line_number);
  if (type == "plan") {
    r.task_type = TaskType::kPlan;
  } else if (type == "completion") {
    r.task_type = TaskType::kCompletion;
  } else {
    throw MalformedRecord(line_number, "unknown task_type '" + type + "'");
  }
  r.response_text = string_field(obj, "response_text", line_number);
  r.ground_truth = string_field(obj, "ground_truth", line_number);
  if (obj.contains("grammar_ref")) r.grammar_ref = string_field(obj, "grammar_ref", line_number);
  if (obj.contains("ontology_ref")) {
    r.ontology_ref = string_field(obj, "ontology_ref", line_number);
  }
  return r;
}

RewardBreakdown score_record(const ScoreRecord& record, ResourceCache& resources,
                             const RewardWeights& weights, std::size_t line_number) {
  const SkillGrammar& grammar = resources.grammar(record.grammar_ref);
  const Ontology& ontology = resources.ontology(record.ontology_ref);
  RewardTarget target;
  if (record.task_type == TaskType::kPlan) {
    target = parse_ground_truth(record.ground_truth, grammar, line_number);
  } else {
    const std::string label = text::trim(record.ground_truth);
    if (label != "True" && label != "False") {
      throw MalformedRecord(line_number, "completion ground truth must be True or False");
    }
    target = label == "True";
  }
  return total_reward(record.response_text, target, grammar, ontology, weights);
}

std::string breakdown_to_json(const std::string& id, const RewardBreakdown& breakdown) {
  return breakdown_object(id, breakdown).dump();
}

void score_stream(std::istream& in, std::ostream& out, ResourceCache& resources,
                  const RewardWeights& weights) {
  std::string line;
  std::size_t line_number = 0;
  std::vector<std::string> lines;
  while (std::getline(in, line)) {
    ++line_number;
    if (text::is_blank(line)) continue;
    const ScoreRecord record = parse_score_record(line, line_number);
    lines.push_back(
        breakdown_to_json(record.id, score_record(record, resources, weights, line_number)));
  }
  // Nothing is written unless the whole batch is valid.
  for (const std::string& l : lines) out << l << '\n';
}

// -- eval --------------------------------------------------------------------------

std::vector<Prediction> read_predictions(std::istream& in) {
  std::vector<Prediction> out;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (text::is_blank(line)) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw MalformedRecord(line_number, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) throw MalformedRecord(line_number, "record must be an object");
    out.push_back(Prediction{string_field(obj, "id", line_number),
                             string_field(obj, "response_text", line_number)});
  }
  return out;
}

EvalAggregate aggregate(std::span<const EvalRecord> records) {
  EvalAggregate a;
  a.count = records.size();
  if (records.empty()) return a;
  std::size_t passes = 0;
  for (const EvalRecord& r : records) {
    a.mean_bm += r.breakdown.bm;
    a.mean_content += r.breakdown.content;
    a.mean_total += r.breakdown.total;
    passes += r.breakdown.format == 1 ? 1 : 0;
  }
  const auto n = static_cast<double>(records.size());
  a.mean_bm /= n;
  a.mean_content /= n;
  a.mean_total /= n;
  a.format_pass_rate = static_cast<double>(passes) / n;
  return a;
}

EvalReport evaluate(std::span<const Prediction> predictions,
                    std::span<const Triplet> dataset, ResourceCache& resources,
                    const RewardWeights& weights) {
  std::unordered_map<std::string, const Prediction*> by_id;
  for (const Prediction& p : predictions) {
    if (!by_id.emplace(p.id, &p).second) {
      throw CliError("duplicate prediction id '" + p.id + "'");
    }
  }
  std::set<std::string> planning_ids;
  for (const Triplet& t : dataset) {
    if (t.task_type == TaskType::kPlan) planning_ids.insert(t.task_id);
  }
  for (const Prediction& p : predictions) {
    if (!planning_ids.count(p.id)) throw UnknownId(p.id);
  }

  EvalReport report;
  std::size_t index = 0;
  for (const Triplet& t : dataset) {
    ++index;
    if (t.task_type != TaskType::kPlan) continue;
    auto it = by_id.find(t.task_id);
    if (it == by_id.end()) throw MissingPrediction(t.task_id);
    const SkillGrammar& grammar = resources.grammar(t.grammar_ref);
    const Plan truth = parse_ground_truth(t.y, grammar, index);
    report.records.push_back(EvalRecord{
        t.task_id, t.tag.empty() ? "all" : t.tag,
        total_reward(it->second->response_text, truth, grammar,
                     resources.ontology("default"), weights)});
  }

  std::map<std::string, std::vector<EvalRecord>> groups;
  for (const EvalRecord& r : report.records) groups[r.tag].push_back(r);
  for (const auto& [tag, records] : groups) report.by_tag[tag] = aggregate(records);
  report.overall = aggregate(report.records);
  return report;
}

std::string eval_report_json(const EvalReport& report) {
  json doc;
  doc["overall"] = aggregate_json(report.overall);
  json tags = json::object();
  for (const auto& [tag, a] : report.by_tag) tags[tag] = aggregate_json(a);
  doc["by_tag"] = std::move(tags);
  json records = json::array();
  for (const EvalRecord& r : report.records) {
    json o = breakdown_object(r.id, r.breakdown);
    o["tag"] = r.tag;
    records.push_back(std::move(o));
  }
  doc["records"] = std::move(records);
  return doc.dump(2) + "\n";
}

// -- synthesize --------------------------------------------------------------------

SynthesizeResult synthesize(const SynthesizeOptions& options, const Context& context) {
  const SkillGrammar& grammar = context.grammar;
  try {
    const std::vector<SkillDemo> library =
        options.library_path.empty() ? default_library(grammar)
                                     : load_library(options.library_path, grammar);
    const ConstraintTable constraints =
        options.constraints_path.empty()
            ? ConstraintTable::default_table(grammar)
            : ConstraintTable::load(options.constraints_path, grammar);
    const InstructionPool pool = options.instructions_path.empty()
                                     ? InstructionPool::default_pool()
                                     : InstructionPool::load(options.instructions_path);
    SynthesisConfig cfg;
    cfg.count = options.count;
    cfg.k_min = options.k_min;
    cfg.k_max = options.k_max;
    cfg.seed = context.seed;
    const auto tasks = synthesize_tasks(library, cfg, pool, constraints, grammar);

    SynthesizeResult result;
    for (const TaskSpec& task : tasks) {
      for (Triplet& t : make_triplets(task, grammar, context.grammar_ref,
                                      options.negatives_per_subtask)) {
        t.tag = options.tag;
        result.triplets.push_back(std::move(t));
      }
    }
    if (options.split) result.split = split_dataset(result.triplets);
    return result;
  } catch (const MalformedRecord&) {
    throw;
  } catch (const CliError&) {
    throw;
  } catch (const std::exception& e) {
    throw CliError(e.what());
  }
}

std::pair<std::filesystem::path, std::filesystem::path> split_paths(
    const std::filesystem::path& out) {
  const std::filesystem::path dir = out.parent_path();
  const std::string stem = out.stem().string();
  return {dir / (stem + ".train.jsonl"), dir / (stem + ".test.jsonl")};
}

// -- train-toy ---------------------------------------------------------------------

ToyRunConfig parse_toy_config(std::string_view json_text, const Context& context) {
  const json doc = parse_json(json_text, "train-toy config");
  if (!doc.is_object()) throw CliError("train-toy config must be a JSON object");
  static const std::set<std::string> kKeys = {
      "group_size",   "clip",          "kl_weight",        "learning_rate",
      "steps",        "seed",          "reference_refresh", "inner_epochs",
      "horizon",      "prompts_per_step", "optimizer",     "max_grad_norm",
      "weights",      "tasks",         "synthesize",       "vocabulary_size"};
  for (const auto& [key, value] : doc.items()) {
    if (!kKeys.count(key)) throw CliError("unknown train-toy config key '" + key + "'");
  }
  ToyRunConfig cfg;
  cfg.weights = context.weights;
  cfg.grpo.seed = context.seed;
  cfg.synthesis.seed = context.seed;
  cfg.synthesis.count = 20;
  try {
    GrpoConfig& g = cfg.grpo;
    g.group_size = doc.value("group_size", g.group_size);
    g.clip = doc.value("clip", g.clip);
    g.kl_weight = doc.value("kl_weight", g.kl_weight);
    g.learning_rate = doc.value("learning_rate", g.learning_rate);
    g.steps = doc.value("steps", g.steps);
    g.seed = doc.value("seed", g.seed);
    g.reference_refresh = doc.value("reference_refresh", g.reference_refresh);
    g.inner_epochs = doc.value("inner_epochs", g.inner_epochs);
    g.horizon = doc.value("horizon", g.horizon);
    g.prompts_per_step = doc.value("prompts_per_step", g.prompts_per_step);
    g.max_grad_norm = doc.value("max_grad_norm", g.max_grad_norm);
    const std::string optimizer = doc.value("optimizer", std::string("adam"));
    if (optimizer == "adam") {
      g.optimizer = GrpoConfig::Optimizer::kAdam;
    } else if (optimizer == "sgd") {
      g.optimizer = GrpoConfig::Optimizer::kSgd;
    } else {
      throw CliError("optimizer must be \"adam\" or \"sgd\"");
    }
    if (doc.contains("weights")) apply_weights(doc.at("weights"), cfg.weights);
    cfg.tasks_path = doc.value("tasks", std::string());
    if (doc.contains("synthesize")) {
      const json& s = doc.at("synthesize");
      cfg.synthesis.count = s.value("count", cfg.synthesis.count);
      cfg.synthesis.k_min = s.value("k_min", cfg.synthesis.k_min);
      cfg.synthesis.k_max = s.value("k_max", cfg.synthesis.k_max);
      cfg.synthesis.seed = s.value("seed", cfg.synthesis.seed);
    }
    cfg.vocabulary_size = doc.value("vocabulary_size", cfg.vocabulary_size);
    g.validate();
  } catch (const json::exception& e) {
    throw CliError(std::string("train-toy config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw CliError(std::string("train-toy config: ") + e.what());
  }
  return cfg;
}

ToyRun run_toy(const ToyRunConfig& config, const Context& context,
               const std::filesystem::path& base_dir) {
  const SkillGrammar& grammar = context.grammar;
  const std::vector<SkillDemo> library = default_library(grammar);
  ToyRun run;
  if (!config.tasks_path.empty()) {
    std::vector<Triplet> dataset;
    try {
      dataset = read_dataset(resolve(base_dir, config.tasks_path));
    } catch (const MalformedRecord&) {
      throw;
    } catch (const std::exception& e) {
      throw CliError(e.what());
    }
    std::size_t index = 0;
    for (const Triplet& t : dataset) {
      ++index;
      if (t.task_type != TaskType::kPlan) continue;
      run.tasks.push_back(ToyTask{t.q, parse_ground_truth(t.y, grammar, index)});
    }
    if (run.tasks.empty()) throw CliError("task file has no planning records");
  } else {
    try {
      const auto specs =
          synthesize_tasks(library, config.synthesis, InstructionPool::default_pool(),
                           ConstraintTable::default_table(grammar), grammar);
      run.tasks = make_toy_tasks(specs, grammar);
    } catch (const std::exception& e) {
      throw CliError(e.what());
    }
  }

  std::vector<PlanStep> known;
  for (const SkillDemo& d : library) known.push_back(d.step);
  for (const ToyTask& t : run.tasks) {
    known.insert(known.end(), t.ground_truth.steps.begin(), t.ground_truth.steps.end());
  }
  const SlotFillers fillers = slot_fillers(known, grammar);
  try {
    run.vocabulary = candidate_vocabulary(run.tasks, grammar, context.ontology,
                                          config.weights, fillers.objects,
                                          fillers.locations, config.vocabulary_size);
  } catch (const std::invalid_argument& e) {
    throw CliError(e.what());
  }
  run.report = train_toy(run.tasks, run.vocabulary, config.grpo, grammar,
                         context.ontology, config.weights);
  return run;
}

std::string step_record_json(const TrainStepRecord& r) {
  json o;
  o["step"] = r.step;
  o["first_task"] = r.first_task;
  o["tasks"] = r.tasks;
  o["mean_reward"] = num(r.mean_reward);
  o["mean_abs_advantage"] = num(r.mean_abs_advantage);
  o["kl"] = num(r.kl);
  o["clip_fraction"] = num(r.clip_fraction);
  o["loss"] = num(r.loss);
  return o.dump();
}

std::string toy_summary_json(const ToyRun& run, const SkillGrammar& grammar) {
  const TrainReport& r = run.report;
  json doc;
  doc["tasks"] = run.tasks.size();
  doc["vocabulary_size"] = run.vocabulary.size();
  doc["steps"] = r.steps.size();
  doc["initial_mean_reward"] = num(r.initial_mean_reward);
  doc["final_mean_reward"] = num(r.final_mean_reward);
  doc["unordered_matches"] = r.unordered_matches;
  doc["exact_matches"] = r.exact_matches;
  json outcomes = json::array();
  for (const TaskOutcome& o : r.outcomes) {
    outcomes.push_back(json{{"task", o.task},
                            {"greedy_plan", grammar.render_plan(o.greedy_plan)},
                            {"ground_truth", grammar.render_plan(run.tasks[o.task].ground_truth)},
                            {"greedy_reward", num(o.greedy_reward)},
                            {"exact_match", o.exact_match},
                            {"unordered_match", o.unordered_match}});
  }
  doc["outcomes"] = std::move(outcomes);
  return doc.dump(2) + "\n";
}

// -- selfcheck ---------------------------------------------------------------------

std::string format_selfcheck(const SelfcheckReport& report) {
  std::string out;
  for (const SuiteResult& s : report.suites) {
    if (s.passed) {
      out += "PASS " + s.name + " (" + std::to_string(s.cases) + " cases)\n";
    } else {
      out += "FAIL " + s.name + ": " + s.counterexample + "\n";
    }
  }
  return out;
}

}  // namespace rever::cli
