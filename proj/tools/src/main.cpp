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

#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "rever/cli/commands.hpp"
#include "rever/dataset.hpp"
#include "rever/executor.hpp"

namespace cli = rever::cli;

namespace {

// Runs `write` against the file at `path`, or stdout when empty.
void with_output(const std::string& path, const std::function<void(std::ostream&)>& write) {
  if (path.empty()) {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw cli::CliError("cannot write " + path);
  write(out);
  if (!out) throw cli::CliError("write failed: " + path);
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw cli::CliError("cannot open " + path);
  return in;
}

std::string slurp(const std::string& path) {
  std::ifstream in = open_input(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path dir_of(const std::string& path) {
  return std::filesystem::path(path).parent_path();
}

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const cli::CliError& e) {
    std::cerr << "error: " << e.what() << '\n';
  } catch (const rever::MalformedRecord& e) {
    std::cerr << "malformed record: " << e.what() << '\n';
  } catch (const cli::MissingPrediction& e) {
    std::cerr << "missing prediction: " << e.what() << '\n';
  } catch (const cli::UnknownId& e) {
    std::cerr << "unknown id: " << e.what() << '\n';
  } catch (const rever::GrammarError& e) {
    std::cerr << "grammar error: " << e.what() << '\n';
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return cli::kExitCheckFailed;
  }
  return cli::kExitInvalid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rever: plan rewards, GRPO toy training, task synthesis and execution simulation"};
  app.require_subcommand(1);
  app.fallthrough();

  cli::GlobalOptions global;
  app.add_option("--grammar", global.grammar_path, "Skill grammar file")->check(CLI::ExistingFile);
  app.add_option("--ontology", global.ontology_path, "Ontology file")->check(CLI::ExistingFile);
  app.add_option("--weights", global.weights_path, "Reward weights JSON")->check(CLI::ExistingFile);
  app.add_option("--seed", global.seed, "Random seed");
  app.add_option("--out", global.out, "Output file (default: stdout)");

  std::function<int()> action;

  auto* score = app.add_subcommand("score", "Score rollouts from a batch file");
  std::string score_input;
  score->add_option("input", score_input, "Batch scoring JSONL")->required()->check(CLI::ExistingFile);
  score->callback([&] {
    action = [&] {
      const cli::Context ctx = cli::load_context(global);
      cli::ResourceCache resources(ctx, dir_of(score_input));
      std::ifstream in = open_input(score_input);
      std::ostringstream buffer;
      cli::score_stream(in, buffer, resources, ctx.weights);
      with_output(global.out, [&](std::ostream& out) { out << buffer.str(); });
      return cli::kExitOk;
    };
  });

  auto* eval = app.add_subcommand("eval", "Evaluate plan predictions against a dataset");
  std::string predictions_path, dataset_path;
  eval->add_option("--predictions", predictions_path, "Predictions JSONL {id, response_text}")
      ->required()->check(CLI::ExistingFile);
  eval->add_option("--dataset", dataset_path, "Dataset JSONL")->required()->check(CLI::ExistingFile);
  eval->callback([&] {
    action = [&] {
      const cli::Context ctx = cli::load_context(global);
      std::ifstream pin = open_input(predictions_path);
      const auto predictions = cli::read_predictions(pin);
      const auto dataset = rever::read_dataset(std::filesystem::path(dataset_path));
      cli::ResourceCache resources(ctx, dir_of(dataset_path));
      const cli::EvalReport report = cli::evaluate(predictions, dataset, resources, ctx.weights);
      with_output(global.out, [&](std::ostream& out) { out << cli::eval_report_json(report); });
      return cli::kExitOk;
    };
  });

  auto* synth = app.add_subcommand("synthesize", "Synthesize a planning/completion dataset");
  cli::SynthesizeOptions synth_options;
  synth->add_option("--library", synth_options.library_path, "Skill library JSONL")
      ->check(CLI::ExistingFile);
  synth->add_option("--constraints", synth_options.constraints_path, "Composition rules file")
      ->check(CLI::ExistingFile);
  synth->add_option("--instructions", synth_options.instructions_path, "Instruction pool file")
      ->check(CLI::ExistingFile);
  synth->add_option("--count", synth_options.count, "Number of tasks")->capture_default_str();
  synth->add_option("--kmin", synth_options.k_min, "Minimum sub-tasks")->capture_default_str();
  synth->add_option("--kmax", synth_options.k_max, "Maximum sub-tasks")->capture_default_str();
  synth->add_option("--negatives", synth_options.negatives_per_subtask,
                    "Negative completion records per sub-task")->capture_default_str();
  synth->add_option("--tag", synth_options.tag, "Dataset tag written into every record");
  synth->add_flag("--split", synth_options.split,
                  "Also write <stem>.train.jsonl / <stem>.test.jsonl (9:1 by task)");
  synth->callback([&] {
    action = [&] {
      if (synth_options.split && global.out.empty()) {
        throw cli::CliError("--split needs --out");
      }
      const cli::Context ctx = cli::load_context(global);
      const cli::SynthesizeResult result = cli::synthesize(synth_options, ctx);
      with_output(global.out,
                  [&](std::ostream& out) { rever::write_dataset(result.triplets, out); });
      if (result.split) {
        const auto [train, test] = cli::split_paths(global.out);
        rever::write_dataset(result.split->train, train);
        rever::write_dataset(result.split->test, test);
      }
      return cli::kExitOk;
    };
  });

  auto* train = app.add_subcommand("train-toy", "Train the tabular toy planner with GRPO");
  std::string train_config, summary_path;
  train->add_option("--config", train_config, "Training config JSON")->required()
      ->check(CLI::ExistingFile);
  train->add_option("--summary", summary_path,
                    "Summary JSON (default: <out stem>.summary.json, or stdout)");
  train->callback([&] {
    action = [&] {
      const cli::Context ctx = cli::load_context(global);
      const cli::ToyRunConfig cfg = cli::parse_toy_config(slurp(train_config), ctx);
      const cli::ToyRun run = cli::run_toy(cfg, ctx, dir_of(train_config));
      with_output(global.out, [&](std::ostream& out) {
        for (const auto& record : run.report.steps) out << cli::step_record_json(record) << '\n';
      });
      std::string summary_file = summary_path;
      if (summary_file.empty() && !global.out.empty()) {
        const std::filesystem::path out(global.out);
        summary_file = (out.parent_path() / (out.stem().string() + ".summary.json")).string();
      }
      with_output(summary_file,
                  [&](std::ostream& out) { out << cli::toy_summary_json(run, ctx.grammar); });
      return cli::kExitOk;
    };
  });

  auto* simulate = app.add_subcommand("simulate", "Run a scripted execution scenario");
  std::string scenario_path, sim_summary_path;
  simulate->add_option("scenario", scenario_path, "Scenario JSON")->required()
      ->check(CLI::ExistingFile);
  simulate->add_option("--summary", sim_summary_path, "Summary JSON (default: stdout)");
  simulate->callback([&] {
    action = [&] {
      const cli::Context ctx = cli::load_context(global);
      rever::Scenario scenario;
      try {
        scenario = rever::load_scenario(scenario_path, ctx.grammar);
      } catch (const std::exception& e) {
        throw cli::CliError(e.what());
      }
      rever::ScriptedWorld world(scenario);
      const rever::RunResult result =
          rever::run_task(scenario.instruction, world.ports(), scenario.config);
      const auto violations = rever::audit_trace(result.trace, scenario.config);
      with_output(global.out,
                  [&](std::ostream& out) { out << rever::trace_to_jsonl(result.trace); });
      with_output(sim_summary_path,
                  [&](std::ostream& out) { out << rever::run_summary_json(result) << '\n'; });
      for (const std::string& v : violations) std::cerr << "trace violation: " << v << '\n';
      return violations.empty() ? cli::kExitOk : cli::kExitCheckFailed;
    };
  });

  auto* selfcheck = app.add_subcommand("selfcheck", "Run the oracle, gradient and round-trip suites");
  selfcheck->callback([&] {
    action = [&] {
      const rever::SelfcheckReport report =
          rever::run_selfcheck(global.seed, rever::max_weight_matching);
      with_output(global.out,
                  [&](std::ostream& out) { out << cli::format_selfcheck(report); });
      return report.passed() ? cli::kExitOk : cli::kExitCheckFailed;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kExitOk : cli::kExitInvalid;
  }
  return guarded(action);
}
