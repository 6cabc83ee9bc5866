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

#ifndef REVER_TEXT_HPP_
#define REVER_TEXT_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rever::text {

std::string trim(std::string_view s);

// Trims and collapses every internal whitespace run to a single space.
std::string normalize_space(std::string_view s);

// ASCII lower-casing. Non-ASCII bytes pass through unchanged.
std::string casefold(std::string_view s);

std::vector<std::string> split_words(std::string_view s);

// Splits on '\n', dropping a trailing '\r' from each line.
std::vector<std::string> split_lines(std::string_view s);

bool is_blank(std::string_view s);

// Rounds to 9 significant digits; all numeric output goes through this.
double round_sig9(double value);

// 64-bit FNV-1a; stable across platforms, used for dataset splits.
std::uint64_t fnv1a64(std::string_view s);

}  // namespace rever::text

#endif  // REVER_TEXT_HPP_
