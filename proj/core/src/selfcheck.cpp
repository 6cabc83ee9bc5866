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

#include "rever/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "rever/grammar.hpp"

namespace rever {
namespace {

constexpr double kWeightLevels[] = {0.0, 0.3, 0.35, 0.65, 0.7, 1.0};

std::string dump_matrix(const SimilarityMatrix& m) {
  std::string out = std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + " [";
  char buf[40];
  for (std::size_t r = 0; r < m.rows(); ++r) {
    out += r == 0 ? "[" : ", [";
    for (std::size_t c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), c == 0 ? "%.17g" : ", %.17g", m(r, c));
      out += buf;
    }
    out += "]";
  }
  return out + "]";
}

void brute_force(const SimilarityMatrix& w, std::size_t row, std::vector<char>& taken,
                 double partial, double& best) {
  if (row == w.rows()) {
    best = std::max(best, partial);
    return;
  }
  brute_force(w, row + 1, taken, partial, best);
  for (std::size_t c = 0; c < w.cols(); ++c) {
    if (taken[c]) continue;
    taken[c] = 1;
    brute_force(w, row + 1, taken, partial + w(row, c), best);
    taken[c] = 0;
  }
}

std::string describe_matching(const Matching& m) {
  std::string out = "{";
  char buf[64];
  for (const MatchedPair& p : m.pairs) {
    std::snprintf(buf, sizeof(buf), "(%zu,%zu,%.17g)", p.generated, p.ground_truth,
                  p.weight);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "} total=%.17g", m.total_weight);
  return out + buf;
}

// Empty string when the matching is a valid injective matching whose
// reported total is the in-order sum of its pairs.
std::string validate_matching(const SimilarityMatrix& w, const Matching& m) {
  std::vector<char> rows(w.rows(), 0), cols(w.cols(), 0);
  double sum = 0.0;
  std::size_t previous = 0;
  for (std::size_t i = 0; i < m.pairs.size(); ++i) {
    const MatchedPair& p = m.pairs[i];
    if (p.generated >= w.rows() || p.ground_truth >= w.cols()) return "index out of range";
    if (rows[p.generated] || cols[p.ground_truth]) return "matching not injective";
    if (i > 0 && p.generated <= previous) return "pairs not sorted";
    if (p.weight != w(p.generated, p.ground_truth)) return "pair weight mismatch";
    rows[p.generated] = cols[p.ground_truth] = 1;
    previous = p.generated;
    sum += p.weight;
  }
  if (sum != m.total_weight) return "total_weight is not the sum of pairs";
  return {};
}

}  // namespace

double brute_force_matching_value(const SimilarityMatrix& weights) {
  double best = 0.0;
  std::vector<char> taken(weights.cols(), 0);
  brute_force(weights, 0, taken, 0.0, best);
  return best;
}

bool SelfcheckReport::passed() const {
  return std::all_of(suites.begin(), suites.end(),
                     [](const SuiteResult& s) { return s.passed; });
}

SuiteResult check_matching_oracle(std::uint64_t seed, const MatchingSolver& solver,
                                  std::size_t cases) {
  SuiteResult result{"matching-oracle", true, 0, {}};
  Rng rng(seed);
  for (std::size_t n = 0; n < cases; ++n) {
    SimilarityMatrix w(rng.below(8), rng.below(8));
    const bool discrete = rng.below(2) == 0;
    for (std::size_t r = 0; r < w.rows(); ++r) {
      for (std::size_t c = 0; c < w.cols(); ++c) {
        w(r, c) = discrete ? kWeightLevels[rng.below(std::size(kWeightLevels))]
                           : rng.uniform();
      }
    }
    ++result.cases;
    const Matching m = solver(w);
    std::string problem = validate_matching(w, m);
    const double oracle = brute_force_matching_value(w);
    if (problem.empty() && m.total_weight != oracle) {
      char buf[96];
      std::snprintf(buf, sizeof(buf), "solver %.17g != oracle %.17g", m.total_weight,
                    oracle);
      problem = buf;
    }
    if (!problem.empty()) {
      result.passed = false;
      result.counterexample =
          "case " + std::to_string(n) + ": " + problem + "; matrix " + dump_matrix(w) +
          "; matching " + describe_matching(m);
      return result;
    }
  }
  return result;
}

GradientCase random_gradient_case(Rng& rng, double kl_weight,
                                  bool ratios_inside_clip, double margin) {
  const std::size_t horizon = 1 + rng.below(4);
  const std::size_t vocab = 2 + rng.below(5);
  GradientCase gc{ToyPlanPolicy(horizon, vocab), {}, {}};
  gc.config.kl_weight = kl_weight;
  gc.config.group_size = 2 + rng.below(7);

  // Reference first, then move the current logits away from it.
  for (double& x : gc.policy.logit_table()) x = 2.0 * rng.uniform() - 1.0;
  gc.policy.snapshot_reference();
  for (double& x : gc.policy.logit_table()) x += 1.5 * (2.0 * rng.uniform() - 1.0);

  const double eps = gc.config.clip;
  std::vector<double> rewards;
  for (std::size_t i = 0; i < gc.config.group_size; ++i) {
    auto choices = gc.policy.sample(rng);
    const double logp = gc.policy.log_prob(choices);
    double ratio;
    const std::size_t region = ratios_inside_clip ? 1 : rng.below(3);
    if (region == 0) {
      ratio = 0.3 + (1.0 - eps - margin - 0.3) * rng.uniform();
    } else if (region == 1) {
      ratio = 1.0 - eps + margin + (2.0 * (eps - margin)) * rng.uniform();
    } else {
      ratio = 1.0 + eps + margin + 0.8 * rng.uniform();
    }
    gc.group.logp_old.push_back(logp - std::log(ratio));
    gc.group.choices.push_back(std::move(choices));
    rewards.push_back(rng.uniform());
  }
  gc.group.advantages = group_advantages(rewards);
  return gc;
}

SuiteResult check_gradients(std::uint64_t seed, std::size_t cases, double tolerance) {
  SuiteResult result{"grpo-gradient", true, 0, {}};
  Rng rng(seed);
  constexpr double kBetas[] = {0.0, 0.04, 1.0};
  for (std::size_t n = 0; n < cases; ++n) {
    const double beta = kBetas[n % std::size(kBetas)];
    GradientCase gc = random_gradient_case(rng, beta);
    const GradientCheckResult check = gradient_check(gc.policy, gc.group, gc.config);
    ++result.cases;
    if (!(check.max_relative_error <= tolerance)) {
      char buf[128];
      std::snprintf(buf, sizeof(buf), "case %zu (beta=%g): max relative error %.3e", n,
                    beta, check.max_relative_error);
      result.passed = false;
      result.counterexample = buf;
      return result;
    }
  }
  return result;
}

SuiteResult check_grammar_round_trip(std::uint64_t seed, std::size_t cases) {
  SuiteResult result{"grammar-round-trip", true, 0, {}};
  static const std::vector<std::string> kArgs = {
      "apple", "red apple", "basket", "tea tray", "pen", "the blue cup",
      "box",   "drawer",    "lid",    "teacup",   "mouse pad"};
  const SkillGrammar grammar = SkillGrammar::default_grammar();
  Rng rng(seed);
  for (std::size_t n = 0; n < cases; ++n) {
    Plan plan;
    const std::size_t len = 1 + rng.below(8);
    for (std::size_t i = 0; i < len; ++i) {
      const std::size_t id = rng.below(grammar.size());
      std::vector<std::string> args;
      for (std::size_t s = 0; s < grammar.at(id).slots().size(); ++s) {
        args.push_back(kArgs[rng.below(kArgs.size())]);
      }
      plan.steps.push_back(grammar.make_step(id, std::move(args)));
    }
    ++result.cases;
    const std::string rendered = grammar.render_plan(plan);
    auto parsed = parse_plan(rendered, grammar);
    if (!parsed || !(*parsed == plan)) {
      result.passed = false;
      result.counterexample = "case " + std::to_string(n) + ": '" + rendered + "'" +
                              (parsed ? " re-parsed differently"
                                      : " failed: " + parsed.error().front().describe());
      return result;
    }
  }
  return result;
}

SelfcheckReport run_selfcheck(std::uint64_t seed, const MatchingSolver& solver) {
  SelfcheckReport report;
  report.suites.push_back(check_matching_oracle(Rng::derive(seed, 1), solver));
  report.suites.push_back(check_gradients(Rng::derive(seed, 2)));
  report.suites.push_back(check_grammar_round_trip(Rng::derive(seed, 3)));
  return report;
}

}  // namespace rever
