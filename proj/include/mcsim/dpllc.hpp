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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mcsim/types.hpp"

namespace mcsim {

struct HyperRamConfig {
  Cycle access_latency_cycles = 24;  ///< fixed per-burst setup
  Cycle cycles_per_beat = 2;
  std::uint32_t channels = 2;
};

void validate(const HyperRamConfig& cfg);

/// Deterministic-latency external memory. Each channel serves bursts in
/// order; a burst occupies its channel from start to completion.
class HyperRam {
 public:
  explicit HyperRam(HyperRamConfig cfg);

  /// completion = max(cycle, channel_free) + latency + beats * cycles_per_beat
  Cycle access(std::uint32_t beats, Cycle cycle, std::uint32_t channel);

  [[nodiscard]] Cycle channel_free(std::uint32_t channel) const { return free_.at(channel); }
  [[nodiscard]] const HyperRamConfig& config() const { return cfg_; }
  [[nodiscard]] std::uint64_t accesses() const { return accesses_; }
  [[nodiscard]] std::uint64_t busy_cycles() const { return busy_cycles_; }

  // Backing store, addressed by line index.
  void store_line(std::uint64_t line, std::span<const std::uint8_t> bytes);
  void load_line(std::uint64_t line, std::span<std::uint8_t> bytes) const;

 private:
  HyperRamConfig cfg_;
  std::vector<Cycle> free_;
  std::uint64_t accesses_ = 0;
  std::uint64_t busy_cycles_ = 0;
  std::unordered_map<std::uint64_t, std::vector<std::uint8_t>> backing_;
};

struct Partition {
  std::uint32_t base_set = 0;
  std::uint32_t num_sets = 0;

  friend bool operator==(const Partition&, const Partition&) = default;
};

using PartitionTable = std::map<PartId, Partition>;

struct LlcConfig {
  std::uint64_t total_bytes = 128u << 10;
  std::uint32_t line_bytes = 64;
  std::uint32_t ways = 8;
  std::uint32_t beat_bytes = 8;  ///< bus beat, used to size HyperRAM line transfers
  PartitionTable partition_table;
  PartId default_part = 0;

  [[nodiscard]] std::uint32_t num_sets() const {
    return static_cast<std::uint32_t>(total_bytes / (std::uint64_t{line_bytes} * ways));
  }
  [[nodiscard]] std::uint32_t line_beats() const { return line_bytes / beat_bytes; }
};

void validate(const LlcConfig& cfg);
void validate_partitions(const PartitionTable& table, std::uint32_t num_sets);

struct LlcCounters {
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t evictions = 0;
  std::uint64_t flushes = 0;
  std::uint64_t writebacks = 0;

  friend bool operator==(const LlcCounters&, const LlcCounters&) = default;
};

struct LookupResult {
  bool hit = false;
  Cycle ready = 0;  ///< cycle the line's data is usable
  std::uint32_t set = 0;
  std::optional<std::uint64_t> victim_line;
  bool victim_dirty = false;
};

/// Set-partitioned, write-allocate, writeback LLC with per-set LRU.
class Llc {
 public:
  Llc(LlcConfig cfg, HyperRamConfig ram);

  /// part_id resolved through the partition table (unknown -> default_part).
  [[nodiscard]] PartId resolve(PartId part) const;
  [[nodiscard]] std::uint32_t set_index(Addr addr, PartId part) const;

  LookupResult lookup(Addr addr, PartId part, Op op, Cycle cycle);

  /// Invalidates every line of `part` (writing back dirty ones). Unknown
  /// part_ids are a no-op that records a warning.
  std::uint64_t flush_partition(PartId part, Cycle cycle);

  /// Installs a new partition table. Partitions whose set range changes must
  /// have been flushed; lines still resident there are force-flushed and
  /// counted as violations.
  void reprogram(const PartitionTable& table, Cycle cycle);

  // Functional data path (timing is taken at `cycle` but data moves at once).
  void write_bytes(Addr addr, PartId part, std::span<const std::uint8_t> bytes, Cycle cycle = 0);
  void read_bytes(Addr addr, PartId part, std::span<std::uint8_t> bytes, Cycle cycle = 0);

  [[nodiscard]] const LlcCounters& counters(PartId part) const;
  [[nodiscard]] const std::map<PartId, LlcCounters>& all_counters() const { return counters_; }
  [[nodiscard]] const LlcConfig& config() const { return cfg_; }
  [[nodiscard]] const HyperRam& hyperram() const { return ram_; }
  [[nodiscard]] const std::vector<std::string>& warnings() const { return warnings_; }
  [[nodiscard]] std::uint64_t reprogram_violations() const { return violations_; }
  [[nodiscard]] std::uint64_t valid_lines(PartId part) const;

  /// Every valid line sits in a set owned by its partition.
  [[nodiscard]] bool inclusion_holds() const;
  /// Ways of `set` from most to least recently used.
  [[nodiscard]] std::vector<std::uint32_t> lru_order(std::uint32_t set) const;
  /// Tag/valid/dirty/LRU snapshot of a set range, for isolation checks.
  [[nodiscard]] std::vector<std::uint64_t> state_digest(const Partition& range) const;

 private:
  struct Line {
    std::uint64_t tag = 0;  // full line index
    bool valid = false;
    bool dirty = false;
    PartId owner = 0;
    Cycle ready = 0;
    std::uint64_t last_use = 0;
  };

  Line& line(std::uint32_t set, std::uint32_t way) { return lines_[std::size_t{set} * cfg_.ways + way]; }
  [[nodiscard]] const Line& line(std::uint32_t set, std::uint32_t way) const {
    return lines_[std::size_t{set} * cfg_.ways + way];
  }
  std::span<std::uint8_t> data(std::uint32_t set, std::uint32_t way);
  [[nodiscard]] std::uint32_t channel_of(std::uint64_t line_index) const;
  void evict(std::uint32_t set, std::uint32_t way, Cycle cycle);
  std::uint64_t flush_range(const Partition& range, Cycle cycle);
  std::pair<std::uint32_t, std::uint32_t> locate(Addr addr, PartId part, Op op, Cycle cycle);

  LlcConfig cfg_;
  HyperRam ram_;
  std::vector<Line> lines_;
  std::vector<std::uint8_t> data_;
  std::map<PartId, LlcCounters> counters_;
  std::vector<std::string> warnings_;
  std::uint64_t use_clock_ = 0;
  std::uint64_t violations_ = 0;
};

}  // namespace mcsim
