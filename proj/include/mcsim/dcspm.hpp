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
#include <optional>
#include <span>
#include <vector>

#include "mcsim/transport.hpp"
#include "mcsim/types.hpp"

namespace mcsim {

enum class SpmMode : std::uint8_t { Interleaved, Contiguous };

inline const char* to_string(SpmMode m) { return m == SpmMode::Interleaved ? "interleaved" : "contiguous"; }

/// An aliased view of the whole scratchpad. The window an address falls in
/// selects the bank decode; `port` is the AXI port the window is reached through.
struct AliasWindow {
  Addr base = 0;
  SpmMode mode = SpmMode::Interleaved;
  std::uint32_t port = 0;
};

struct SpmConfig {
  std::uint64_t total_bytes = 1u << 20;
  std::uint32_t num_banks = 16;
  std::uint32_t word_bytes = 8;  ///< interleaving granule
  std::uint32_t ports = 2;
  std::vector<AliasWindow> alias_windows;

  [[nodiscard]] std::uint64_t bank_bytes() const { return total_bytes / num_banks; }
};

void validate(const SpmConfig& cfg);

struct SpmLocation {
  std::uint32_t bank = 0;
  std::uint64_t offset = 0;
  SpmMode mode = SpmMode::Interleaved;
  std::uint32_t port = 0;

  friend bool operator==(const SpmLocation&, const SpmLocation&) = default;
};

/// Bank decode. nullopt when the address is outside every alias window.
[[nodiscard]] std::optional<SpmLocation> spm_decode(const SpmConfig& cfg, Addr addr);

struct BankState {
  Cycle busy_until = 0;
  std::uint64_t conflict_count = 0;
  std::uint64_t serviced = 0;
};

/// One beat presented to the scratchpad in a cycle.
struct SpmBeat {
  std::uint32_t port = 0;
  Op op = Op::Read;
  Addr addr = 0;
};

/// Banked scratchpad with one-cycle banks. Per cycle each port serves at
/// most one beat (read and write channels alternate round-robin) and each
/// bank serves at most one port (round-robin across ports).
class Dcspm {
 public:
  explicit Dcspm(SpmConfig cfg);

  /// Decides which of this cycle's beats are serviced. At most one beat per
  /// (port, op). Losers retry next cycle; each bank-conflict stall is counted.
  std::vector<bool> service(std::span<const SpmBeat> beats, Cycle cycle);

  /// Functional access to the backing storage through any alias window.
  void write(Addr addr, std::span<const std::uint8_t> bytes);
  void read(Addr addr, std::span<std::uint8_t> bytes) const;

  [[nodiscard]] const SpmConfig& config() const { return cfg_; }
  [[nodiscard]] const BankState& bank(std::uint32_t i) const { return banks_.at(i); }
  [[nodiscard]] std::uint64_t total_conflicts() const;
  [[nodiscard]] std::uint64_t port_stalls() const { return port_stalls_; }
  [[nodiscard]] std::uint32_t peak_beats_per_cycle() const { return peak_; }

 private:
  [[nodiscard]] std::uint64_t physical(Addr addr) const;

  SpmConfig cfg_;
  std::vector<BankState> banks_;
  std::vector<RoundRobin> bank_rr_;  // over ports
  std::vector<RoundRobin> port_rr_;  // over {read, write}
  std::vector<std::uint8_t> storage_;
  std::uint64_t port_stalls_ = 0;
  std::uint32_t peak_ = 0;
};

}  // namespace mcsim
