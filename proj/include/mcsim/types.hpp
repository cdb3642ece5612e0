/*
 * Copyright 2026 The mcsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace mcsim {

using Cycle = std::uint64_t;
using Addr = std::uint64_t;
using TxnId = std::uint64_t;
using InitiatorId = std::uint32_t;
using PartId = std::uint32_t;

inline constexpr Cycle kNever = std::numeric_limits<Cycle>::max();

enum class Op : std::uint8_t { Read, Write };
enum class Criticality : std::uint8_t { Critical, NonCritical };

inline const char* to_string(Op op) { return op == Op::Read ? "read" : "write"; }
inline const char* to_string(Criticality c) {
  return c == Criticality::Critical ? "critical" : "non-critical";
}

/// Thrown for configuration mistakes that make a simulation meaningless
/// (scheduling in the past, inconsistent geometry, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr bool is_pow2(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

constexpr std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

}  // namespace mcsim
