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

#include "mcsim/dpllc.hpp"

#include <algorithm>
#include <numeric>

namespace mcsim {

void validate(const HyperRamConfig& cfg) {
  if (cfg.access_latency_cycles < 1 || cfg.cycles_per_beat < 1) {
    throw ConfigError("hyperram: latency parameters must be >= 1");
  }
  if (cfg.channels < 1) throw ConfigError("hyperram: at least one channel required");
}

HyperRam::HyperRam(HyperRamConfig cfg) : cfg_(cfg), free_(cfg.channels, 0) { validate(cfg_); }

Cycle HyperRam::access(std::uint32_t beats, Cycle cycle, std::uint32_t channel) {
  if (beats < 1) throw ConfigError("hyperram: access with zero beats");
  const Cycle start = std::max(cycle, free_.at(channel));
  const Cycle service = cfg_.access_latency_cycles + Cycle{beats} * cfg_.cycles_per_beat;
  free_[channel] = start + service;
  ++accesses_;
  busy_cycles_ += service;
  return free_[channel];
}

void HyperRam::store_line(std::uint64_t line, std::span<const std::uint8_t> bytes) {
  backing_[line].assign(bytes.begin(), bytes.end());
}

void HyperRam::load_line(std::uint64_t line, std::span<std::uint8_t> bytes) const {
  const auto it = backing_.find(line);
  if (it == backing_.end()) {
    std::fill(bytes.begin(), bytes.end(), std::uint8_t{0});
    return;
  }
  std::copy_n(it->second.begin(), std::min(bytes.size(), it->second.size()), bytes.begin());
}

void validate_partitions(const PartitionTable& table, std::uint32_t num_sets) {
  std::uint64_t used = 0;
  for (auto it = table.begin(); it != table.end(); ++it) {
    const auto& [id, p] = *it;
    if (p.num_sets < 1) throw ConfigError("llc: partition " + std::to_string(id) + " has no sets");
    if (std::uint64_t{p.base_set} + p.num_sets > num_sets) {
      throw ConfigError("llc: partition " + std::to_string(id) + " exceeds the set count");
    }
    for (auto jt = std::next(it); jt != table.end(); ++jt) {
      const auto& q = jt->second;
      if (!(p.base_set + p.num_sets <= q.base_set || q.base_set + q.num_sets <= p.base_set)) {
        throw ConfigError("llc: partitions " + std::to_string(id) + " and " + std::to_string(jt->first) +
                          " overlap");
      }
    }
    used += p.num_sets;
  }
  if (used > num_sets) throw ConfigError("llc: partitions exceed the cache");
}

void validate(const LlcConfig& cfg) {
  if (!is_pow2(cfg.line_bytes) || !is_pow2(cfg.beat_bytes) || cfg.line_bytes < cfg.beat_bytes) {
    throw ConfigError("llc: line_bytes and beat_bytes must be powers of two with line >= beat");
  }
  if (cfg.ways < 1) throw ConfigError("llc: ways must be >= 1");
  if (cfg.total_bytes % (std::uint64_t{cfg.line_bytes} * cfg.ways) != 0 || cfg.num_sets() == 0) {
    throw ConfigError("llc: total_bytes must be a multiple of line_bytes * ways");
  }
  validate_partitions(cfg.partition_table, cfg.num_sets());
  if (!cfg.partition_table.contains(cfg.default_part)) {
    throw ConfigError("llc: default_part " + std::to_string(cfg.default_part) + " has no partition");
  }
}

Llc::Llc(LlcConfig cfg, HyperRamConfig ram)
    : cfg_(std::move(cfg)),
      ram_(ram),
      lines_(std::size_t{cfg_.num_sets()} * cfg_.ways),
      data_(std::size_t{cfg_.num_sets()} * cfg_.ways * cfg_.line_bytes, 0) {
  validate(cfg_);
}

PartId Llc::resolve(PartId part) const {
  return cfg_.partition_table.contains(part) ? part : cfg_.default_part;
}

std::uint32_t Llc::set_index(Addr addr, PartId part) const {
  const Partition& p = cfg_.partition_table.at(resolve(part));
  const std::uint64_t line_index = addr / cfg_.line_bytes;
  return p.base_set + static_cast<std::uint32_t>(line_index % p.num_sets);
}

std::span<std::uint8_t> Llc::data(std::uint32_t set, std::uint32_t way) {
  return {data_.data() + (std::size_t{set} * cfg_.ways + way) * cfg_.line_bytes, cfg_.line_bytes};
}

std::uint32_t Llc::channel_of(std::uint64_t line_index) const {
  return static_cast<std::uint32_t>(line_index % ram_.config().channels);
}

void Llc::evict(std::uint32_t set, std::uint32_t way, Cycle cycle) {
  Line& l = line(set, way);
  if (l.dirty) {
    ram_.access(cfg_.line_beats(), cycle, channel_of(l.tag));
    ram_.store_line(l.tag, data(set, way));
    ++counters_[l.owner].writebacks;
  }
  l.valid = false;
  l.dirty = false;
}

std::pair<std::uint32_t, std::uint32_t> Llc::locate(Addr addr, PartId part, Op op, Cycle cycle) {
  const PartId owner = resolve(part);
  const std::uint64_t line_index = addr / cfg_.line_bytes;
  const std::uint32_t set = set_index(addr, owner);
  LlcCounters& ctr = counters_[owner];

  for (std::uint32_t w = 0; w < cfg_.ways; ++w) {
    Line& l = line(set, w);
    if (l.valid && l.tag == line_index) {
      ++ctr.hits;
      l.last_use = ++use_clock_;
      if (op == Op::Write) l.dirty = true;
      return {set, w};
    }
  }

  ++ctr.misses;
  std::uint32_t victim = 0;
  bool found_free = false;
  for (std::uint32_t w = 0; w < cfg_.ways; ++w) {
    if (!line(set, w).valid) {
      victim = w;
      found_free = true;
      break;
    }
  }
  if (!found_free) {
    for (std::uint32_t w = 1; w < cfg_.ways; ++w) {
      if (line(set, w).last_use < line(set, victim).last_use) victim = w;
    }
    ++ctr.evictions;
    evict(set, victim, cycle);
  }
  Line& l = line(set, victim);
  l.tag = line_index;
  l.valid = true;
  l.dirty = op == Op::Write;
  l.owner = owner;
  l.last_use = ++use_clock_;
  l.ready = ram_.access(cfg_.line_beats(), cycle, channel_of(line_index));
  ram_.load_line(line_index, data(set, victim));
  return {set, victim};
}

LookupResult Llc::lookup(Addr addr, PartId part, Op op, Cycle cycle) {
  const PartId owner = resolve(part);
  const std::uint64_t misses_before = counters_[owner].misses;
  const std::uint32_t set = set_index(addr, owner);
  const std::vector<Line> before(lines_.begin() + std::ptrdiff_t{set} * cfg_.ways,
                                 lines_.begin() + std::ptrdiff_t{set + 1} * cfg_.ways);
  const auto [s, w] = locate(addr, part, op, cycle);
  LookupResult r;
  r.set = s;
  r.hit = counters_[owner].misses == misses_before;
  r.ready = std::max(cycle, line(s, w).ready);
  if (!r.hit && before[w].valid) {
    r.victim_line = before[w].tag;
    r.victim_dirty = before[w].dirty;
  }
  return r;
}

std::uint64_t Llc::flush_range(const Partition& range, Cycle cycle) {
  std::uint64_t n = 0;
  for (std::uint32_t s = range.base_set; s < range.base_set + range.num_sets; ++s) {
    for (std::uint32_t w = 0; w < cfg_.ways; ++w) {
      if (line(s, w).valid) {
        evict(s, w, cycle);
        ++n;
      }
    }
  }
  return n;
}

std::uint64_t Llc::flush_partition(PartId part, Cycle cycle) {
  const auto it = cfg_.partition_table.find(part);
  if (it == cfg_.partition_table.end()) {
    warnings_.push_back("flush of unknown part_id " + std::to_string(part) + " ignored");
    return 0;
  }
  const std::uint64_t n = flush_range(it->second, cycle);
  counters_[part].flushes += n;
  return n;
}

void Llc::reprogram(const PartitionTable& table, Cycle cycle) {
  validate_partitions(table, cfg_.num_sets());
  if (!table.contains(cfg_.default_part)) {
    throw ConfigError("llc: reprogrammed table lacks default_part " + std::to_string(cfg_.default_part));
  }
  for (const auto& [id, old] : cfg_.partition_table) {
    const auto it = table.find(id);
    if (it != table.end() && it->second == old) continue;
    const std::uint64_t resident = flush_range(old, cycle);
    if (resident > 0) {
      ++violations_;
      counters_[id].flushes += resident;
      warnings_.push_back("partition " + std::to_string(id) + " reprogrammed with " +
                          std::to_string(resident) + " resident lines (forced flush)");
    }
  }
  cfg_.partition_table = table;
}

void Llc::write_bytes(Addr addr, PartId part, std::span<const std::uint8_t> bytes, Cycle cycle) {
  std::size_t done = 0;
  while (done < bytes.size()) {
    const Addr a = addr + done;
    const auto [s, w] = locate(a, part, Op::Write, cycle);
    const std::size_t off = a % cfg_.line_bytes;
    const std::size_t n = std::min<std::size_t>(bytes.size() - done, cfg_.line_bytes - off);
    std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(done), n, data(s, w).begin() + static_cast<std::ptrdiff_t>(off));
    done += n;
  }
}

void Llc::read_bytes(Addr addr, PartId part, std::span<std::uint8_t> bytes, Cycle cycle) {
  std::size_t done = 0;
  while (done < bytes.size()) {
    const Addr a = addr + done;
    const auto [s, w] = locate(a, part, Op::Read, cycle);
    const std::size_t off = a % cfg_.line_bytes;
    const std::size_t n = std::min<std::size_t>(bytes.size() - done, cfg_.line_bytes - off);
    auto src = data(s, w);
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(off), n, bytes.begin() + static_cast<std::ptrdiff_t>(done));
    done += n;
  }
}

const LlcCounters& Llc::counters(PartId part) const {
  static const LlcCounters kZero{};
  const auto it = counters_.find(part);
  return it == counters_.end() ? kZero : it->second;
}

std::uint64_t Llc::valid_lines(PartId part) const {
  const auto it = cfg_.partition_table.find(part);
  if (it == cfg_.partition_table.end()) return 0;
  std::uint64_t n = 0;
  for (std::uint32_t s = it->second.base_set; s < it->second.base_set + it->second.num_sets; ++s) {
    for (std::uint32_t w = 0; w < cfg_.ways; ++w) n += line(s, w).valid ? 1 : 0;
  }
  return n;
}

bool Llc::inclusion_holds() const {
  for (std::uint32_t s = 0; s < cfg_.num_sets(); ++s) {
    for (std::uint32_t w = 0; w < cfg_.ways; ++w) {
      const Line& l = line(s, w);
      if (!l.valid) continue;
      const auto it = cfg_.partition_table.find(l.owner);
      if (it == cfg_.partition_table.end()) return false;
      if (s < it->second.base_set || s >= it->second.base_set + it->second.num_sets) return false;
    }
  }
  return true;
}

std::vector<std::uint32_t> Llc::lru_order(std::uint32_t set) const {
  std::vector<std::uint32_t> ways(cfg_.ways);
  std::iota(ways.begin(), ways.end(), 0u);
  std::stable_sort(ways.begin(), ways.end(), [&](std::uint32_t a, std::uint32_t b) {
    return line(set, a).last_use > line(set, b).last_use;
  });
  return ways;
}

std::vector<std::uint64_t> Llc::state_digest(const Partition& range) const {
  std::vector<std::uint64_t> out;
  for (std::uint32_t s = range.base_set; s < range.base_set + range.num_sets; ++s) {
    const auto order = lru_order(s);
    for (std::uint32_t w : order) {
      const Line& l = line(s, w);
      out.push_back(l.valid ? (l.tag << 1 | (l.dirty ? 1u : 0u)) : ~std::uint64_t{0});
    }
  }
  return out;
}

}  // namespace mcsim
