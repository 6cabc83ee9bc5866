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

#include <memory>
#include <string>
#include <vector>

#include <gtest/gtest.h>

namespace rever {
namespace {

const SkillGrammar& grammar() {
  static const SkillGrammar g = SkillGrammar::default_grammar();
  return g;
}

Plan make_plan(std::initializer_list<std::string_view> steps) {
  Plan p;
  for (std::string_view s : steps) p.steps.push_back(*parse_step(s, grammar()));
  return p;
}

// Compact rendering of the event kinds, pointers and verdicts.
std::vector<std::string> describe(const ExecutionTrace& trace) {
  std::vector<std::string> out;
  for (const TraceEvent& e : trace.events) {
    std::string s(to_string(e.kind));
    if (e.subtask > 0) s += " " + std::to_string(e.subtask);
    if (e.kind == EventKind::kVerifyPolled) s += e.verdict ? " T" : " F";
    out.push_back(s);
  }
  return out;
}

Scenario three_step(std::vector<std::vector<bool>> attempts, std::size_t timeout) {
  Scenario s;
  s.config.timeout_ticks = timeout;
  s.initial_plan = make_plan({"Pick up pen.", "Place into box.", "Push box."});
  s.attempts = std::move(attempts);
  return s;
}

TEST(ExecutorTest, AllSubtasksSucceedImmediately) {
  ScriptedWorld world(three_step({{true}, {true}, {true}}, 10));
  const RunResult r = run_task("tidy", world.ports(), world.scenario().config);
  EXPECT_EQ(r.status, ExecStatus::kSuccess);
  EXPECT_EQ(describe(r.trace),
            (std::vector<std::string>{
                "PlanIssued", "SubtaskStarted 1", "VerifyPolled 1 T", "ControllerStopped 1",
                "SubtaskDone 1", "SubtaskStarted 2", "VerifyPolled 2 T",
                "ControllerStopped 2", "SubtaskDone 2", "SubtaskStarted 3",
                "VerifyPolled 3 T", "ControllerStopped 3", "SubtaskDone 3", "Success"}));
  EXPECT_EQ(r.trace.count(EventKind::kSubtaskDone), 3u);
  EXPECT_EQ(r.trace.ticks, 3u);
  EXPECT_EQ(r.trace.elapsed_ms(), 600u);
}

TEST(ExecutorTest, EmptyPlanFailsWithoutStarting) {
  Scenario s;
  ScriptedWorld world(s);
  const RunResult r = run_task("tidy", world.ports(), s.config);
  EXPECT_EQ(r.status, ExecStatus::kFailure);
  EXPECT_EQ(describe(r.trace), (std::vector<std::string>{"PlanIssued", "Failure"}));
  EXPECT_TRUE(world.controller_log().empty());
}

TEST(ExecutorTest, TimeoutThenReplanKeepsPointer) {
  Scenario s = three_step({{true}, {false}, {true}, {true}}, 2);
  s.replans = {s.initial_plan};
  ScriptedWorld world(s);
  const RunResult r = run_task("tidy", world.ports(), s.config);
  EXPECT_EQ(r.status, ExecStatus::kSuccess);
  EXPECT_EQ(describe(r.trace),
            (std::vector<std::string>{
                "PlanIssued", "SubtaskStarted 1", "VerifyPolled 1 T", "ControllerStopped 1",
                "SubtaskDone 1", "SubtaskStarted 2", "VerifyPolled 2 F", "VerifyPolled 2 F",
                "TimeoutFired 2", "ControllerStopped 2", "ReplanIssued 2",
                "SubtaskStarted 2", "VerifyPolled 2 T", "ControllerStopped 2",
                "SubtaskDone 2", "SubtaskStarted 3", "VerifyPolled 3 T",
                "ControllerStopped 3", "SubtaskDone 3", "Success"}));
  EXPECT_EQ(r.trace.count(EventKind::kReplanIssued), 1u);
  EXPECT_TRUE(audit_trace(r.trace, s.config).empty());
}

class MonitoredExecuteTest : public ::testing::Test {
 protected:
  bool execute(std::vector<bool> schedule, std::size_t timeout) {
    Scenario s;
    s.config.timeout_ticks = timeout;
    s.attempts = {std::move(schedule)};
    world_ = std::make_unique<ScriptedWorld>(s);
    executor_ = std::make_unique<Executor>(world_->ports(), s.config);
    return executor_->monitored_execute(*parse_step("Open box.", grammar()), 1, "obs");
  }

  std::unique_ptr<ScriptedWorld> world_;
  std::unique_ptr<Executor> executor_;
};

TEST_F(MonitoredExecuteTest, TrueAtThirdPoll) {
  EXPECT_TRUE(execute({false, false, true}, 10));
  EXPECT_EQ(describe(executor_->trace()),
            (std::vector<std::string>{"SubtaskStarted 1", "VerifyPolled 1 F",
                                      "VerifyPolled 1 F", "VerifyPolled 1 T",
                                      "ControllerStopped 1", "SubtaskDone 1"}));
  EXPECT_EQ(executor_->trace().ticks, 3u);
  EXPECT_EQ(world_->controller_log(), (std::vector<std::string>{"start", "stop"}));
}

TEST_F(MonitoredExecuteTest, AlwaysFalseTimesOut) {
  EXPECT_FALSE(execute({false}, 5));
  const ExecutionTrace& t = executor_->trace();
  EXPECT_EQ(t.count(EventKind::kVerifyPolled), 5u);
  EXPECT_EQ(t.count(EventKind::kTimeoutFired), 1u);
  EXPECT_EQ(t.count(EventKind::kSubtaskDone), 0u);
  EXPECT_EQ(t.events.back().kind, EventKind::kControllerStopped);
  EXPECT_EQ(t.ticks, 5u);
}

TEST_F(MonitoredExecuteTest, TrueAtFirstPoll) {
  EXPECT_TRUE(execute({true}, 5));
  EXPECT_EQ(executor_->trace().count(EventKind::kVerifyPolled), 1u);
  EXPECT_EQ(executor_->trace().ticks, 1u);
}

TEST(ExecutorTest, ReplanBudgetExhaustion) {
  Scenario s = three_step({{false}}, 3);
  s.default_verdict = false;
  s.config.max_replans = 2;
  ScriptedWorld world(s);
  const RunResult r = run_task("tidy", world.ports(), s.config);
  EXPECT_EQ(r.status, ExecStatus::kFailure);
  EXPECT_EQ(r.trace.count(EventKind::kReplanIssued), 2u);
  EXPECT_EQ(r.trace.count(EventKind::kTimeoutFired), 3u);
  EXPECT_EQ(r.trace.ticks, 9u);
  EXPECT_TRUE(audit_trace(r.trace, s.config).empty());
}

TEST(ExecutorTest, MonitorFaultStopsControllerAndFails) {
  Scenario s = three_step({{true}, {true}, {true}}, 4);
  s.fault_on_attempt = 1;
  ScriptedWorld world(s);
  const RunResult r = run_task("tidy", world.ports(), s.config);
  EXPECT_EQ(r.status, ExecStatus::kFailure);
  const auto d = describe(r.trace);
  ASSERT_GE(d.size(), 3u);
  EXPECT_EQ(d[d.size() - 3], "ControllerStopped 2");
  EXPECT_EQ(d[d.size() - 2], "PortFault");
  EXPECT_EQ(d.back(), "Failure");
  EXPECT_EQ(world.controller_log().size(), 4u);
  EXPECT_TRUE(audit_trace(r.trace, s.config).empty());
}

TEST(ExecutorTest, ReplanShorterThanPointerSucceeds) {
  Scenario s = three_step({{true}, {false}}, 1);
  s.replans = {make_plan({"Pick up pen."})};
  ScriptedWorld world(s);
  const RunResult r = run_task("tidy", world.ports(), s.config);
  EXPECT_EQ(r.status, ExecStatus::kSuccess);
  EXPECT_EQ(r.trace.count(EventKind::kSubtaskDone), 1u);
}

TEST(ExecutorTest, AuditFlagsBrokenTraces) {
  ScriptedWorld world(three_step({{true}, {true}, {true}}, 10));
  const RunResult r = run_task("tidy", world.ports(), world.scenario().config);
  ExecutionTrace broken = r.trace;
  broken.events.erase(broken.events.begin() + 3);  // drop a ControllerStopped
  EXPECT_FALSE(audit_trace(broken, world.scenario().config).empty());
  broken = r.trace;
  broken.events.pop_back();
  EXPECT_FALSE(audit_trace(broken, world.scenario().config).empty());
  broken = r.trace;
  broken.events[2].verdict = false;  // SubtaskDone without a True poll
  EXPECT_FALSE(audit_trace(broken, world.scenario().config).empty());
}

TEST(ExecutorTest, RandomScenariosSatisfyInvariants) {
  const Plan pool = make_plan({"Pick up pen.", "Place into box.", "Push box.",
                               "Open drawer.", "Put apple into basket."});
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Scenario s = random_scenario(seed, pool.steps);
    ScriptedWorld a(s);
    ScriptedWorld b(s);
    const RunResult ra = run_task(s.instruction, a.ports(), s.config);
    const RunResult rb = run_task(s.instruction, b.ports(), s.config);
    const auto problems = audit_trace(ra.trace, s.config);
    EXPECT_TRUE(problems.empty()) << "seed " << seed << ": " << problems.front();
    EXPECT_EQ(ra.trace.events, rb.trace.events) << seed;
    EXPECT_EQ(trace_to_jsonl(ra.trace), trace_to_jsonl(rb.trace));
  }
}

TEST(ExecutorTest, ScenarioFilesReplay) {
  const std::string dir = std::string(REVER_DATA_DIR) + "/scenarios/";
  const Scenario ok = load_scenario(dir + "all_succeed.json", grammar());
  ScriptedWorld w1(ok);
  EXPECT_EQ(run_task(ok.instruction, w1.ports(), ok.config).status, ExecStatus::kSuccess);

  const Scenario empty = load_scenario(dir + "empty_plan.json", grammar());
  ScriptedWorld w2(empty);
  EXPECT_EQ(run_task(empty.instruction, w2.ports(), empty.config).status,
            ExecStatus::kFailure);

  const Scenario replan = load_scenario(dir + "replan_once.json", grammar());
  ScriptedWorld w3(replan);
  const RunResult r = run_task(replan.instruction, w3.ports(), replan.config);
  EXPECT_EQ(r.status, ExecStatus::kSuccess);
  EXPECT_EQ(r.trace.ticks, 11u);
  EXPECT_EQ(run_summary_json(r),
            R"({"status":"Success","ticks":11,"tick_period_ms":200,"elapsed_ms":2200,)"
            R"("subtasks_done":3,"replans":1,"timeouts":1})");
}

TEST(ExecutorTest, ConfigAndScenarioValidation) {
  ExecConfig cfg;
  cfg.timeout_ticks = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.timeout_ticks = 1;
  cfg.tick_period_ms = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  EXPECT_THROW(parse_scenario(R"({"initial_plan":["Fly away."]})", grammar()),
               std::runtime_error);
  EXPECT_THROW(parse_scenario(R"({"attempts":[[true]]})", grammar()), std::runtime_error);
  EXPECT_THROW(parse_scenario(R"({"initial_plan":[],"exec":{"timeout_ticks":0}})", grammar()),
               std::invalid_argument);
}

}  // namespace
}  // namespace rever
