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

#ifndef REVER_EXPECTED_HPP_
#define REVER_EXPECTED_HPP_

#include <stdexcept>
#include <utility>
#include <variant>

namespace rever {

// Minimal value-or-error holder for parse results. Contract violations still
// throw; Expected is reserved for inputs that are routinely malformed.
template <typename T, typename E>
class Expected {
 public:
  Expected(T value) : state_(std::in_place_index<0>, std::move(value)) {}
  Expected(E error) : state_(std::in_place_index<1>, std::move(error)) {}

  bool has_value() const { return state_.index() == 0; }
  explicit operator bool() const { return has_value(); }

  const T& value() const& {
    if (!has_value()) throw std::logic_error("Expected::value() on error");
    return std::get<0>(state_);
  }
  T&& value() && {
    if (!has_value()) throw std::logic_error("Expected::value() on error");
    return std::get<0>(std::move(state_));
  }
  const E& error() const {
    if (has_value()) throw std::logic_error("Expected::error() on value");
    return std::get<1>(state_);
  }

  const T* operator->() const { return &value(); }
  const T& operator*() const& { return value(); }

 private:
  std::variant<T, E> state_;
};

}  // namespace rever

#endif  // REVER_EXPECTED_HPP_
