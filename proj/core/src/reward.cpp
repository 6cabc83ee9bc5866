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

#include "rever/reward.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "rever/text.hpp"

namespace rever {

void RewardWeights::validate() const {
  for (double v : {format, content, action, object, length}) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("reward weights must be finite and >= 0");
    }
  }
  if (std::abs(action + object - 1.0) > 1e-12) {
    throw std::invalid_argument("action and object weights must sum to 1");
  }
}

bool arguments_similar(std::string_view a, std::string_view b,
                       const Ontology& ontology) {
  const std::string fa = text::casefold(text::normalize_space(a));
  const std::string fb = text::casefold(text::normalize_space(b));
  if (fa.empty() || fb.empty()) return false;
  if (fa == fb) return true;
  if (fa.find(fb) != std::string::npos || fb.find(fa) != std::string::npos) {
    return true;
  }
  return ontology.share_set(fa, fb);
}

double step_similarity(const PlanStep& a, const PlanStep& b,
                       const SkillGrammar& grammar, const Ontology& ontology,
                       const RewardWeights& w) {
  const SkillTemplate& ta = grammar.at(a.template_id);
  const SkillTemplate& tb = grammar.at(b.template_id);
  const double act = ta.verb() == tb.verb() ? 1.0 : 0.0;

  const std::size_t positions = std::max(a.args.size(), b.args.size());
  double obj = 1.0;
  if (positions > 0) {
    std::size_t similar = 0;
    for (std::size_t i = 0; i < std::min(a.args.size(), b.args.size()); ++i) {
      if (arguments_similar(a.args[i], b.args[i], ontology)) ++similar;
    }
    obj = static_cast<double>(similar) / static_cast<double>(positions);
  }
  return w.action * act + w.object * obj;
}

SimilarityMatrix similarity_matrix(const Plan& generated,
                                   const Plan& ground_truth,
                                   const SkillGrammar& grammar,
                                   const Ontology& ontology,
                                   const RewardWeights& w) {
  SimilarityMatrix m(generated.size(), ground_truth.size());
  for (std::size_t i = 0; i < generated.size(); ++i) {
    for (std::size_t j = 0; j < ground_truth.size(); ++j) {
      m(i, j) = step_similarity(generated.steps[i], ground_truth.steps[j],
                                grammar, ontology, w);
    }
  }
  return m;
}

MatchScore bipartite_match_score(const Plan& generated,
                                 const Plan& ground_truth,
                                 const SkillGrammar& grammar,
                                 const Ontology& ontology,
                                 const RewardWeights& w) {
  if (ground_truth.empty()) throw EmptyGroundTruth();
  MatchScore score;
  if (generated.empty()) return score;
  score.matching = max_weight_matching(
      similarity_matrix(generated, ground_truth, grammar, ontology, w));
  score.bm = score.matching.total_weight /
             static_cast<double>(std::max(generated.size(), ground_truth.size()));
  return score;
}

namespace {

double length_penalty(const Plan& generated, const Plan& ground_truth,
                      const RewardWeights& w) {
  const auto m = static_cast<double>(generated.size());
  const auto n = static_cast<double>(ground_truth.size());
  return w.length * std::abs(m - n);
}

}  // namespace

double content_reward(const Plan& generated, const Plan& ground_truth,
                      const SkillGrammar& grammar, const Ontology& ontology,
                      const RewardWeights& w) {
  const MatchScore score =
      bipartite_match_score(generated, ground_truth, grammar, ontology, w);
  return score.bm - length_penalty(generated, ground_truth, w);
}

int format_reward(std::string_view text) {
  return parse_response(text).has_value() ? 1 : 0;
}

int completion_reward(std::string_view prediction, bool label) {
  const std::string answer = text::trim(prediction);
  return answer == (label ? "True" : "False") ? 1 : 0;
}

std::string_view to_string(TaskType type) {
  return type == TaskType::kPlan ? "plan" : "completion";
}

RewardBreakdown total_reward(std::string_view response,
                             const RewardTarget& target,
                             const SkillGrammar& grammar,
                             const Ontology& ontology, const RewardWeights& w) {
  RewardBreakdown out;
  out.task_type = std::holds_alternative<Plan>(target) ? TaskType::kPlan
                                                       : TaskType::kCompletion;
  std::optional<std::string> answer;
  if (auto parts = parse_response(response)) {
    out.format = 1;
    answer = parts->answer;
  } else {
    out.diagnostics.push_back("format: " +
                              std::string(to_string(parts.error().kind)) +
                              ": " + parts.error().message);
    answer = extract_answer(response);
  }

  if (const Plan* ground_truth = std::get_if<Plan>(&target)) {
    if (ground_truth->empty()) throw EmptyGroundTruth();
    if (!answer) {
      out.diagnostics.push_back("content: no <answer> block");
    } else if (auto plan = parse_plan(*answer, grammar)) {
      MatchScore score =
          bipartite_match_score(*plan, *ground_truth, grammar, ontology, w);
      out.bm = score.bm;
      out.matching = std::move(score.matching);
      out.length_penalty = length_penalty(*plan, *ground_truth, w);
      out.content = out.bm - out.length_penalty;
    } else {
      for (const StepParseError& error : plan.error()) {
        out.diagnostics.push_back("plan: " + error.describe());
      }
    }
  } else {
    const bool label = std::get<bool>(target);
    if (!answer) {
      out.diagnostics.push_back("content: no <answer> block");
    } else {
      out.content = completion_reward(*answer, label);
    }
  }
  out.total = w.format * out.format + w.content * out.content;
  return out;
}

}  // namespace rever
