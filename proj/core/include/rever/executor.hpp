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

#ifndef REVER_EXECUTOR_HPP_
#define REVER_EXECUTOR_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rever/datagen.hpp"
#include "rever/grammar.hpp"

namespace rever {

// Opaque observation reference (frame id, path, URI).
using Observation = std::string;

class PlannerPort {
 public:
  virtual ~PlannerPort() = default;
  virtual Plan plan(const std::string& instruction, const Observation& initial) = 0;
  // Returns a full plan whose first k-1 steps are the completed ones, so the
  // unchanged 1-based pointer k addresses the next step to run.
  virtual Plan replan(const std::string& instruction, const Plan& current,
                      std::size_t k, const Observation& failure) = 0;
};

class ControllerPort {
 public:
  virtual ~ControllerPort() = default;
  virtual void start(const PlanStep& step) = 0;
  virtual void stop() = 0;
};

class MonitorPort {
 public:
  virtual ~MonitorPort() = default;
  virtual bool verify(const PlanStep& step, const Observation& start,
                      const Observation& now) = 0;
};

class ObserverPort {
 public:
  virtual ~ObserverPort() = default;
  virtual Observation capture() = 0;
};

struct Ports {
  PlannerPort& planner;
  ControllerPort& controller;
  MonitorPort& monitor;
  ObserverPort& observer;
};

struct ExecConfig {
  std::uint32_t tick_period_ms = 200;  // 5 Hz
  std::size_t timeout_ticks = 25;
  std::size_t max_replans = 3;

  void validate() const;
};

class PortFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EventKind {
  kPlanIssued,
  kSubtaskStarted,
  kVerifyPolled,
  kControllerStopped,
  kSubtaskDone,
  kTimeoutFired,
  kReplanIssued,
  kPortFault,
  kSuccess,
  kFailure,
};

std::string_view to_string(EventKind kind);

struct TraceEvent {
  EventKind kind;
  std::uint64_t tick = 0;
  std::size_t subtask = 0;  // 1-based pointer k; 0 when not applicable
  bool verdict = false;     // kVerifyPolled only
  std::size_t plan_length = 0;  // kPlanIssued / kReplanIssued only
  std::string detail;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

struct ExecutionTrace {
  std::vector<TraceEvent> events;
  std::uint32_t tick_period_ms = 200;
  std::uint64_t ticks = 0;

  std::size_t count(EventKind kind) const;
  std::uint64_t elapsed_ms() const { return ticks * tick_period_ms; }
};

enum class ExecStatus { kSuccess, kFailure };

std::string_view to_string(ExecStatus status);

struct RunResult {
  ExecStatus status = ExecStatus::kFailure;
  ExecutionTrace trace;
};

// Single-threaded simulator of the plan / monitored-execute / replan loop on
// a logical clock: each monitor poll costs one tick.
class Executor {
 public:
  Executor(Ports ports, ExecConfig cfg);

  RunResult run_task(const std::string& instruction);

  // Starts the controller, polls the monitor once per tick until it reports
  // done or the timeout elapses, and always stops the controller.
  // `k` only labels the trace events. Throws PortFault.
  bool monitored_execute(const PlanStep& step, std::size_t k,
                         const Observation& start);

  const ExecutionTrace& trace() const { return trace_; }

 private:
  void emit(EventKind kind, std::size_t subtask = 0, bool verdict = false,
            std::size_t plan_length = 0, std::string detail = {});

  Ports ports_;
  ExecConfig cfg_;
  ExecutionTrace trace_;
};

RunResult run_task(const std::string& instruction, Ports ports,
                   const ExecConfig& cfg);

// Checks the structural trace invariants: ordering, one terminal event,
// balanced start/stop, poll bounds, replan accounting, pointer monotonicity.
// Returns a description per violation; empty means the trace conforms.
std::vector<std::string> audit_trace(const ExecutionTrace& trace,
                                     const ExecConfig& cfg);

std::string trace_to_jsonl(const ExecutionTrace& trace);
std::string run_summary_json(const RunResult& result);

// -- Scripted ports -------------------------------------------------------------

struct Scenario {
  std::string instruction = "Tidy up the small items on the desktop";
  ExecConfig config;
  Plan initial_plan;
  // Verdict schedule per monitored execution, in call order. Poll p of an
  // attempt reads schedule[p], repeating the last entry once exhausted.
  std::vector<std::vector<bool>> attempts;
  // Verdict for attempts beyond the schedule list.
  bool default_verdict = true;
  // Plans returned by successive replan calls; afterwards the current plan
  // is returned unchanged.
  std::vector<Plan> replans;
  // 0-based attempt whose first verify call throws.
  std::optional<std::size_t> fault_on_attempt;
};

// JSON scenario file; steps are written as skill text ("Pick up apple.").
Scenario parse_scenario(std::string_view json_text, const SkillGrammar& grammar);
Scenario load_scenario(const std::filesystem::path& path,
                       const SkillGrammar& grammar);

// Random scenario over the given step pool; deterministic in `seed`.
Scenario random_scenario(std::uint64_t seed, std::span<const PlanStep> pool);

// Implements all four ports from a Scenario. Observations are "obs://<n>"
// with a capture counter, so traces are reproducible.
class ScriptedWorld : public PlannerPort,
                      public ControllerPort,
                      public MonitorPort,
                      public ObserverPort {
 public:
  explicit ScriptedWorld(Scenario scenario);

  Plan plan(const std::string& instruction, const Observation& initial) override;
  Plan replan(const std::string& instruction, const Plan& current, std::size_t k,
              const Observation& failure) override;
  void start(const PlanStep& step) override;
  void stop() override;
  bool verify(const PlanStep& step, const Observation& start,
              const Observation& now) override;
  Observation capture() override;

  Ports ports() { return Ports{*this, *this, *this, *this}; }
  const Scenario& scenario() const { return scenario_; }
  // "start"/"stop" in call order.
  const std::vector<std::string>& controller_log() const { return controller_log_; }

 private:
  Scenario scenario_;
  std::size_t attempt_ = 0;  // attempts started so far
  std::size_t poll_ = 0;
  std::size_t replans_served_ = 0;
  std::size_t captures_ = 0;
  bool running_ = false;
  std::vector<std::string> controller_log_;
};

}  // namespace rever

#endif  // REVER_EXECUTOR_HPP_
