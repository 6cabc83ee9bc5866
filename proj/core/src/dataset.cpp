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

#include "rever/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "json.hpp"
#include "rever/text.hpp"

namespace rever {
namespace {

using json = nlohmann::ordered_json;

const json& require(const json& record, const char* key, std::size_t line) {
  auto it = record.find(key);
  if (it == record.end()) {
    throw MalformedRecord(line, std::string("missing field '") + key + "'");
  }
  return *it;
}

std::string require_string(const json& record, const char* key, std::size_t line) {
  const json& value = require(record, key, line);
  if (!value.is_string()) {
    throw MalformedRecord(line, std::string("field '") + key + "' must be a string");
  }
  return value.get<std::string>();
}

}  // namespace

std::string triplet_to_json(const Triplet& triplet) {
  json record;
  record["task_id"] = triplet.task_id;
  record["task_type"] = std::string(to_string(triplet.task_type));
  record["q"] = triplet.q;
  record["observations"] = triplet.observations;
  record["y"] = triplet.y;
  record["grammar_ref"] = triplet.grammar_ref;
  if (!triplet.tag.empty()) record["tag"] = triplet.tag;
  return record.dump();
}

Triplet triplet_from_json(std::string_view line, std::size_t line_number) {
  json record;
  try {
    record = json::parse(line);
  } catch (const json::parse_error& e) {
    throw MalformedRecord(line_number, std::string("invalid JSON: ") + e.what());
  }
  if (!record.is_object()) throw MalformedRecord(line_number, "record is not an object");

  Triplet t;
  t.task_id = require_string(record, "task_id", line_number);
  const std::string type = require_string(record, "task_type", line_number);
  if (type == "plan") {
    t.task_type = TaskType::kPlan;
  } else if (type == "completion") {
    t.task_type = TaskType::kCompletion;
  } else {
    throw MalformedRecord(line_number, "unknown task_type '" + type + "'");
  }
  t.q = require_string(record, "q", line_number);
  const json& obs = require(record, "observations", line_number);
  if (!obs.is_array()) throw MalformedRecord(line_number, "observations must be an array");
  for (const json& o : obs) {
    if (!o.is_string()) throw MalformedRecord(line_number, "observation must be a string");
    t.observations.push_back(o.get<std::string>());
  }
  t.y = require_string(record, "y", line_number);
  t.grammar_ref = require_string(record, "grammar_ref", line_number);
  if (auto tag = record.find("tag"); tag != record.end()) {
    if (!tag->is_string()) throw MalformedRecord(line_number, "tag must be a string");
    t.tag = tag->get<std::string>();
  }

  const std::size_t expected_obs = t.task_type == TaskType::kPlan ? 1 : 2;
  if (t.observations.size() != expected_obs) {
    throw MalformedRecord(line_number, std::string(to_string(t.task_type)) +
                                           " records need " +
                                           std::to_string(expected_obs) +
                                           " observations");
  }
  if (t.task_type == TaskType::kCompletion && t.y != "True" && t.y != "False") {
    throw MalformedRecord(line_number, "completion label must be True or False");
  }
  return t;
}

void write_dataset(std::span<const Triplet> triplets, std::ostream& out) {
  for (const Triplet& t : triplets) out << triplet_to_json(t) << '\n';
}

void write_dataset(std::span<const Triplet> triplets,
                   const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_dataset(triplets, out);
}

std::vector<Triplet> read_dataset(std::istream& in) {
  std::vector<Triplet> triplets;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::is_blank(line)) continue;
    triplets.push_back(triplet_from_json(line, line_no));
  }
  return triplets;
}

std::vector<Triplet> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_dataset(in);
}

TaskSplit split_task_ids(std::span<const std::string> task_ids,
                         double train_fraction) {
  if (!(train_fraction >= 0.0 && train_fraction <= 1.0)) {
    throw std::invalid_argument("train_fraction must lie in [0, 1]");
  }
  std::set<std::string> distinct(task_ids.begin(), task_ids.end());
  std::vector<std::pair<std::uint64_t, std::string>> keyed;
  keyed.reserve(distinct.size());
  for (const std::string& id : distinct) keyed.emplace_back(text::fnv1a64(id), id);
  std::sort(keyed.begin(), keyed.end());

  const auto n = static_cast<double>(keyed.size());
  const auto test_count =
      static_cast<std::size_t>(std::llround(n * (1.0 - train_fraction)));
  TaskSplit split;
  for (std::size_t i = 0; i < keyed.size(); ++i) {
    (i < test_count ? split.test : split.train).push_back(keyed[i].second);
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

DatasetSplit split_dataset(std::span<const Triplet> triplets,
                           double train_fraction) {
  std::vector<std::string> ids;
  for (const Triplet& t : triplets) ids.push_back(t.task_id);
  const TaskSplit by_task = split_task_ids(ids, train_fraction);
  const std::set<std::string> test(by_task.test.begin(), by_task.test.end());
  DatasetSplit split;
  for (const Triplet& t : triplets) {
    (test.count(t.task_id) ? split.test : split.train).push_back(t);
  }
  return split;
}

}  // namespace rever
