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
#include <random>

namespace mcsim {

/// Uniform draw in [0, n) by rejection. std::uniform_int_distribution is
/// implementation-defined, so it would break cross-platform reproducibility.
inline std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % n;
  std::uint64_t v = rng();
  while (v >= limit) v = rng();
  return v % n;
}

/// Uniform draw in [lo, hi].
inline std::uint64_t draw_between(std::mt19937_64& rng, std::uint64_t lo, std::uint64_t hi) {
  return lo + draw_below(rng, hi - lo + 1);
}

}  // namespace mcsim
