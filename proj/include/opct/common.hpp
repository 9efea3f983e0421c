/*
 * Copyright 2026 The OPCT Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef OPCT_COMMON_HPP_
#define OPCT_COMMON_HPP_

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

namespace opct {

using Rng = std::mt19937_64;

// Predictive-modeling task. The numeric values are part of the binary model
// formats and must not be reordered.
enum class Task : std::uint8_t {
  kStr = 0,   // single-target regression
  kMtr = 1,   // multi-target regression
  kBin = 2,   // binary classification
  kMcc = 3,   // multi-class classification
  kMlc = 4,   // multi-label classification
  kHmlc = 5,  // hierarchical multi-label classification
};

inline std::string_view task_name(Task task) {
  switch (task) {
    case Task::kStr: return "str";
    case Task::kMtr: return "mtr";
    case Task::kBin: return "bin";
    case Task::kMcc: return "mcc";
    case Task::kMlc: return "mlc";
    case Task::kHmlc: return "hmlc";
  }
  return "unknown";
}

inline Task parse_task(std::string_view name) {
  for (int t = 0; t <= 5; ++t) {
    const auto task = static_cast<Task>(t);
    if (task_name(task) == name) return task;
  }
  throw std::invalid_argument("unknown task '" + std::string(name) + "'");
}

inline bool is_classification(Task task) {
  return task == Task::kBin || task == Task::kMcc || task == Task::kMlc ||
         task == Task::kHmlc;
}

// Raised when a weight vector used for weighted statistics sums to zero.
class DegenerateWeights : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Raised by every text and binary reader. `position` is a 1-based line number
// for text formats and a 0-based byte offset for binary formats.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

// SplitMix64 finalizer. Used to derive independent seeds for trees and nodes
// so results do not depend on the order in which work is scheduled.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return mix_seed(mix_seed(base) ^ (index * 0xd1b54a32d192ed03ULL + 1));
}

// Shortest decimal representation that parses back to the same double.
inline std::string format_double(double value) {
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) throw std::runtime_error("cannot format number");
  return std::string(buffer, end);
}

inline bool parse_double(std::string_view text, double& out) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) {
    text.remove_prefix(1);
  }
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' ||
                           text.back() == '\r')) {
    text.remove_suffix(1);
  }
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace opct

#endif  // OPCT_COMMON_HPP_
