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

#ifndef REVER_REWARD_HPP_
#define REVER_REWARD_HPP_

#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rever/grammar.hpp"
#include "rever/matching.hpp"

namespace rever {

class EmptyGroundTruth : public std::invalid_argument {
 public:
  EmptyGroundTruth() : std::invalid_argument("ground-truth plan is empty") {}
};

struct RewardWeights {
  double format = 0.1;   // w_f
  double content = 0.9;  // w_c
  double action = 0.3;   // w_a
  double object = 0.7;   // w_o
  double length = 0.1;   // w_l

  // Throws std::invalid_argument on negative weights or w_a + w_o != 1.
  void validate() const;
};

// Scores one step pair in [0, 1]: w_a * [verbs equal] + w_o * Sim_obj, where
// Sim_obj aligns slot arguments by position and averages over the longer
// slot list. Arguments are similar when equal after trim/casefold, when one
// contains the other, or when an ontology set holds both.
double step_similarity(const PlanStep& a, const PlanStep& b,
                       const SkillGrammar& grammar, const Ontology& ontology,
                       const RewardWeights& w);

bool arguments_similar(std::string_view a, std::string_view b,
                       const Ontology& ontology);

SimilarityMatrix similarity_matrix(const Plan& generated,
                                   const Plan& ground_truth,
                                   const SkillGrammar& grammar,
                                   const Ontology& ontology,
                                   const RewardWeights& w);

struct MatchScore {
  double bm = 0.0;
  Matching matching;
};

// Match weight normalized by max(M, N). Throws EmptyGroundTruth.
MatchScore bipartite_match_score(const Plan& generated,
                                 const Plan& ground_truth,
                                 const SkillGrammar& grammar,
                                 const Ontology& ontology,
                                 const RewardWeights& w);

// bm - w_l * |M - N|; deliberately unclamped.
double content_reward(const Plan& generated, const Plan& ground_truth,
                      const SkillGrammar& grammar, const Ontology& ontology,
                      const RewardWeights& w);

int format_reward(std::string_view text);

int completion_reward(std::string_view prediction, bool label);

enum class TaskType { kPlan, kCompletion };

std::string_view to_string(TaskType type);

// A planning target carries y_plan; a completion target carries y_comp.
using RewardTarget = std::variant<Plan, bool>;

struct RewardBreakdown {
  TaskType task_type = TaskType::kPlan;
  int format = 0;
  double bm = 0.0;
  double length_penalty = 0.0;
  double content = 0.0;
  double total = 0.0;
  Matching matching;
  std::vector<std::string> diagnostics;
};

// Never throws on malformed responses: parse failures fold into a zero
// content score and a diagnostic. An empty planning target still throws
// EmptyGroundTruth.
RewardBreakdown total_reward(std::string_view response,
                             const RewardTarget& target,
                             const SkillGrammar& grammar,
                             const Ontology& ontology, const RewardWeights& w);

}  // namespace rever

#endif  // REVER_REWARD_HPP_
