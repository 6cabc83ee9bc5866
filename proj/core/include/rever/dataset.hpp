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

#ifndef REVER_DATASET_HPP_
#define REVER_DATASET_HPP_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rever/datagen.hpp"

namespace rever {

class MalformedRecord : public std::runtime_error {
 public:
  MalformedRecord(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Record fields, in order: task_id, task_type, q, observations, y,
// grammar_ref, then tag when non-empty.
std::string triplet_to_json(const Triplet& triplet);
Triplet triplet_from_json(std::string_view line, std::size_t line_number);

void write_dataset(std::span<const Triplet> triplets, std::ostream& out);
void write_dataset(std::span<const Triplet> triplets,
                   const std::filesystem::path& path);
std::vector<Triplet> read_dataset(std::istream& in);
std::vector<Triplet> read_dataset(const std::filesystem::path& path);

struct TaskSplit {
  std::vector<std::string> train;
  std::vector<std::string> test;
};

// Orders distinct task ids by FNV-1a hash (id as tie-break) and sends the
// first round(n * (1 - train_fraction)) to test.
TaskSplit split_task_ids(std::span<const std::string> task_ids,
                         double train_fraction = 0.9);

struct DatasetSplit {
  std::vector<Triplet> train;
  std::vector<Triplet> test;
};

DatasetSplit split_dataset(std::span<const Triplet> triplets,
                           double train_fraction = 0.9);

}  // namespace rever

#endif  // REVER_DATASET_HPP_
