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

#include "rever/executor.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "rever/random.hpp"

namespace rever {
namespace {

using json = nlohmann::ordered_json;

bool is_terminal(EventKind kind) {
  return kind == EventKind::kSuccess || kind == EventKind::kFailure;
}

Plan plan_from_json(const json& steps, const SkillGrammar& grammar) {
  if (!steps.is_array()) throw std::runtime_error("plan must be an array of steps");
  Plan plan;
  for (const json& step : steps) {
    auto parsed = parse_step(step.get<std::string>(), grammar);
    if (!parsed) throw std::runtime_error(parsed.error().describe());
    plan.steps.push_back(std::move(parsed).value());
  }
  return plan;
}

}  // namespace

void ExecConfig::validate() const {
  if (tick_period_ms == 0) throw std::invalid_argument("tick_period_ms must be > 0");
  if (timeout_ticks == 0) throw std::invalid_argument("timeout_ticks must be >= 1");
}

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kPlanIssued: return "PlanIssued";
    case EventKind::kSubtaskStarted: return "SubtaskStarted";
    case EventKind::kVerifyPolled: return "VerifyPolled";
    case EventKind::kControllerStopped: return "ControllerStopped";
    case EventKind::kSubtaskDone: return "SubtaskDone";
    case EventKind::kTimeoutFired: return "TimeoutFired";
    case EventKind::kReplanIssued: return "ReplanIssued";
    case EventKind::kPortFault: return "PortFault";
    case EventKind::kSuccess: return "Success";
    case EventKind::kFailure: return "Failure";
  }
  return "?";
}

std::string_view to_string(ExecStatus status) {
  return status == ExecStatus::kSuccess ? "Success" : "Failure";
}

std::size_t ExecutionTrace::count(EventKind kind) const {
  std::size_t n = 0;
  for (const TraceEvent& e : events) n += e.kind == kind ? 1 : 0;
  return n;
}

// -- Executor -------------------------------------------------------------------

Executor::Executor(Ports ports, ExecConfig cfg) : ports_(ports), cfg_(cfg) {
  cfg_.validate();
  trace_.tick_period_ms = cfg_.tick_period_ms;
}

void Executor::emit(EventKind kind, std::size_t subtask, bool verdict,
                    std::size_t plan_length, std::string detail) {
  trace_.events.push_back(
      TraceEvent{kind, trace_.ticks, subtask, verdict, plan_length, std::move(detail)});
}

bool Executor::monitored_execute(const PlanStep& step, std::size_t k,
                                 const Observation& start) {
  try {
    ports_.controller.start(step);
  } catch (const std::exception& e) {
    throw PortFault(std::string("controller start: ") + e.what());
  }
  emit(EventKind::kSubtaskStarted, k);

  bool done = false;
  std::size_t polls = 0;
  try {
    while (!done && polls < cfg_.timeout_ticks) {
      const Observation now = ports_.observer.capture();
      done = ports_.monitor.verify(step, start, now);
      ++polls;
      emit(EventKind::kVerifyPolled, k, done);
      ++trace_.ticks;  // wait(dt)
    }
  } catch (const std::exception& e) {
    try {
      ports_.controller.stop();
    } catch (const std::exception&) {
    }
    emit(EventKind::kControllerStopped, k);
    throw PortFault(std::string("monitor: ") + e.what());
  }
  if (!done) emit(EventKind::kTimeoutFired, k);

  try {
    ports_.controller.stop();
  } catch (const std::exception& e) {
    emit(EventKind::kControllerStopped, k);
    throw PortFault(std::string("controller stop: ") + e.what());
  }
  emit(EventKind::kControllerStopped, k);
  if (done) emit(EventKind::kSubtaskDone, k);
  return done;
}

RunResult Executor::run_task(const std::string& instruction) {
  trace_ = ExecutionTrace{};
  trace_.tick_period_ms = cfg_.tick_period_ms;
  RunResult result;
  auto finish = [&](ExecStatus status, std::string detail) {
    emit(status == ExecStatus::kSuccess ? EventKind::kSuccess : EventKind::kFailure,
         0, false, 0, std::move(detail));
    result.status = status;
    result.trace = trace_;
    return result;
  };

  try {
    const Observation initial = ports_.observer.capture();
    Plan plan = ports_.planner.plan(instruction, initial);
    emit(EventKind::kPlanIssued, 0, false, plan.size());
    if (plan.empty()) return finish(ExecStatus::kFailure, "empty plan");

    std::size_t k = 1;
    std::size_t replans = 0;
    Observation previous = initial;
    while (k <= plan.size()) {
      if (monitored_execute(plan.steps[k - 1], k, previous)) {
        ++k;
        previous = ports_.observer.capture();
        continue;
      }
      const Observation failure = ports_.observer.capture();
      if (replans == cfg_.max_replans) {
        return finish(ExecStatus::kFailure, "replan budget exhausted");
      }
      plan = ports_.planner.replan(instruction, plan, k, failure);
      ++replans;
      emit(EventKind::kReplanIssued, k, false, plan.size());
      if (plan.empty()) return finish(ExecStatus::kFailure, "replan returned empty plan");
      previous = failure;
    }
    return finish(ExecStatus::kSuccess, {});
  } catch (const std::exception& e) {
    emit(EventKind::kPortFault, 0, false, 0, e.what());
    return finish(ExecStatus::kFailure, "port fault");
  }
}

RunResult run_task(const std::string& instruction, Ports ports,
                   const ExecConfig& cfg) {
  return Executor(ports, cfg).run_task(instruction);
}

// -- Audit ------------------------------------------------------------------------

std::vector<std::string> audit_trace(const ExecutionTrace& trace,
                                     const ExecConfig& cfg) {
  std::vector<std::string> problems;
  auto fail = [&](std::size_t index, const std::string& what) {
    problems.push_back("event " + std::to_string(index) + ": " + what);
  };
  const auto& events = trace.events;
  if (events.empty() || !is_terminal(events.back().kind)) {
    problems.push_back("trace does not end in a terminal event");
  }

  std::uint64_t last_tick = 0;
  std::uint64_t total_polls = 0;
  std::size_t terminals = 0;
  std::size_t replans = 0;
  std::size_t timeouts = 0;

  bool running = false;      // between SubtaskStarted and ControllerStopped
  std::size_t current_k = 0;  // pointer of the current/last attempt
  std::size_t polls = 0;
  bool polled_true = false;
  bool last_attempt_done = false;
  bool any_attempt = false;

  for (std::size_t i = 0; i < events.size(); ++i) {
    const TraceEvent& e = events[i];
    if (e.tick < last_tick) fail(i, "tick went backwards");
    last_tick = e.tick;
    if (terminals > 0) fail(i, "event after terminal event");

    switch (e.kind) {
      case EventKind::kSubtaskStarted:
        if (running) fail(i, "start without stop of previous sub-task");
        if (any_attempt) {
          if (e.subtask == current_k + 1 && !last_attempt_done) {
            fail(i, "pointer advanced without SubtaskDone");
          } else if (e.subtask != current_k && e.subtask != current_k + 1) {
            fail(i, "pointer jumped from " + std::to_string(current_k) + " to " +
                        std::to_string(e.subtask));
          } else if (e.subtask == current_k && last_attempt_done) {
            fail(i, "pointer did not advance after SubtaskDone");
          }
        } else if (e.subtask != 1) {
          fail(i, "first sub-task is not k = 1");
        }
        running = true;
        any_attempt = true;
        current_k = e.subtask;
        polls = 0;
        polled_true = false;
        last_attempt_done = false;
        break;
      case EventKind::kVerifyPolled:
        if (!running || e.subtask != current_k) fail(i, "poll outside its sub-task");
        ++polls;
        ++total_polls;
        if (polls > cfg.timeout_ticks) fail(i, "more polls than timeout_ticks");
        if (polled_true) fail(i, "poll after a True verdict");
        polled_true = polled_true || e.verdict;
        break;
      case EventKind::kTimeoutFired:
        ++timeouts;
        if (!running) fail(i, "timeout outside a sub-task");
        if (polls != cfg.timeout_ticks) fail(i, "timeout before timeout_ticks polls");
        break;
      case EventKind::kControllerStopped:
        if (!running) fail(i, "stop without matching start");
        running = false;
        break;
      case EventKind::kSubtaskDone:
        if (running) fail(i, "SubtaskDone before controller stop");
        if (!polled_true || e.subtask != current_k) {
          fail(i, "SubtaskDone without a True poll");
        }
        last_attempt_done = true;
        break;
      case EventKind::kReplanIssued:
        ++replans;
        if (running) fail(i, "replan while controller runs");
        if (e.subtask != current_k || last_attempt_done) {
          fail(i, "replan not preceded by a failed attempt at k");
        }
        break;
      case EventKind::kSuccess:
      case EventKind::kFailure:
        ++terminals;
        if (running) fail(i, "terminal event while controller runs");
        break;
      case EventKind::kPlanIssued:
      case EventKind::kPortFault:
        break;
    }
  }
  if (terminals != 1) problems.push_back("expected exactly one terminal event");
  if (total_polls != trace.ticks) problems.push_back("ticks != total polls");
  if (replans > cfg.max_replans) problems.push_back("replans exceed max_replans");

  const bool exhausted = !events.empty() && events.back().kind == EventKind::kFailure &&
                         events.back().detail == "replan budget exhausted";
  const std::size_t expected_replans = exhausted ? timeouts - 1 : timeouts;
  if (trace.count(EventKind::kPortFault) == 0 && replans != expected_replans) {
    problems.push_back("replans (" + std::to_string(replans) +
                       ") do not match failed executions (" +
                       std::to_string(timeouts) + ")");
  }
  return problems;
}

std::string trace_to_jsonl(const ExecutionTrace& trace) {
  std::string out;
  for (std::size_t i = 0; i < trace.events.size(); ++i) {
    const TraceEvent& e = trace.events[i];
    json record;
    record["seq"] = i;
    record["tick"] = e.tick;
    record["event"] = std::string(to_string(e.kind));
    if (e.subtask > 0) record["subtask"] = e.subtask;
    if (e.kind == EventKind::kVerifyPolled) record["verdict"] = e.verdict;
    if (e.kind == EventKind::kPlanIssued || e.kind == EventKind::kReplanIssued) {
      record["plan_length"] = e.plan_length;
    }
    if (!e.detail.empty()) record["detail"] = e.detail;
    out += record.dump();
    out += '\n';
  }
  return out;
}

std::string run_summary_json(const RunResult& result) {
  json summary;
  summary["status"] = std::string(to_string(result.status));
  summary["ticks"] = result.trace.ticks;
  summary["tick_period_ms"] = result.trace.tick_period_ms;
  summary["elapsed_ms"] = result.trace.elapsed_ms();
  summary["subtasks_done"] = result.trace.count(EventKind::kSubtaskDone);
  summary["replans"] = result.trace.count(EventKind::kReplanIssued);
  summary["timeouts"] = result.trace.count(EventKind::kTimeoutFired);
  return summary.dump();
}

// -- Scenarios ------------------------------------------------------------------

Scenario parse_scenario(std::string_view json_text, const SkillGrammar& grammar) {
  Scenario s;
  try {
    const json doc = json::parse(json_text);
    s.instruction = doc.value("instruction", s.instruction);
    if (auto cfg = doc.find("exec"); cfg != doc.end()) {
      s.config.tick_period_ms = cfg->value("tick_period_ms", s.config.tick_period_ms);
      s.config.timeout_ticks = cfg->value("timeout_ticks", s.config.timeout_ticks);
      s.config.max_replans = cfg->value("max_replans", s.config.max_replans);
    }
    s.initial_plan = plan_from_json(doc.at("initial_plan"), grammar);
    if (auto attempts = doc.find("attempts"); attempts != doc.end()) {
      for (const json& schedule : *attempts) {
        s.attempts.push_back(schedule.get<std::vector<bool>>());
      }
    }
    s.default_verdict = doc.value("default_verdict", s.default_verdict);
    if (auto replans = doc.find("replans"); replans != doc.end()) {
      for (const json& plan : *replans) s.replans.push_back(plan_from_json(plan, grammar));
    }
    if (auto fault = doc.find("fault_on_attempt"); fault != doc.end()) {
      s.fault_on_attempt = fault->get<std::size_t>();
    }
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("scenario: ") + e.what());
  }
  s.config.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path,
                       const SkillGrammar& grammar) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), grammar);
}

Scenario random_scenario(std::uint64_t seed, std::span<const PlanStep> pool) {
  if (pool.empty()) throw std::invalid_argument("random_scenario needs steps");
  Rng rng(seed);
  auto random_plan = [&](std::size_t min_len, std::size_t max_len) {
    Plan plan;
    const std::size_t len = min_len + rng.below(max_len - min_len + 1);
    for (std::size_t i = 0; i < len; ++i) plan.steps.push_back(pool[rng.below(pool.size())]);
    return plan;
  };
  Scenario s;
  s.config.tick_period_ms = 200;
  s.config.timeout_ticks = 1 + rng.below(6);
  s.config.max_replans = rng.below(5);
  s.initial_plan = random_plan(rng.below(10) == 0 ? 0 : 1, 5);
  const std::size_t attempts = rng.below(12);
  for (std::size_t a = 0; a < attempts; ++a) {
    std::vector<bool> schedule(1 + rng.below(8));
    for (std::size_t p = 0; p < schedule.size(); ++p) schedule[p] = rng.below(10) < 3;
    s.attempts.push_back(std::move(schedule));
  }
  s.default_verdict = rng.below(4) != 0;
  const std::size_t replans = rng.below(5);
  for (std::size_t r = 0; r < replans; ++r) {
    s.replans.push_back(random_plan(rng.below(8) == 0 ? 0 : 1, 6));
  }
  if (rng.below(10) == 0) s.fault_on_attempt = rng.below(4);
  return s;
}

ScriptedWorld::ScriptedWorld(Scenario scenario) : scenario_(std::move(scenario)) {}

Plan ScriptedWorld::plan(const std::string&, const Observation&) {
  return scenario_.initial_plan;
}

Plan ScriptedWorld::replan(const std::string&, const Plan& current, std::size_t,
                           const Observation&) {
  if (replans_served_ < scenario_.replans.size()) {
    return scenario_.replans[replans_served_++];
  }
  return current;
}

void ScriptedWorld::start(const PlanStep&) {
  if (running_) throw std::logic_error("controller started twice");
  running_ = true;
  poll_ = 0;
  ++attempt_;
  controller_log_.push_back("start");
}

void ScriptedWorld::stop() {
  running_ = false;
  controller_log_.push_back("stop");
}

bool ScriptedWorld::verify(const PlanStep&, const Observation&, const Observation&) {
  const std::size_t attempt = attempt_ - 1;
  const std::size_t poll = poll_++;
  if (scenario_.fault_on_attempt && *scenario_.fault_on_attempt == attempt && poll == 0) {
    throw std::runtime_error("scripted monitor fault");
  }
  if (attempt >= scenario_.attempts.size()) return scenario_.default_verdict;
  const std::vector<bool>& schedule = scenario_.attempts[attempt];
  if (schedule.empty()) return scenario_.default_verdict;
  return schedule[std::min(poll, schedule.size() - 1)];
}

Observation ScriptedWorld::capture() { return "obs://" + std::to_string(captures_++); }

}  // namespace rever
