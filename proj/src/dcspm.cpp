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

#include "mcsim/dcspm.hpp"

#include <algorithm>
#include <sstream>

namespace mcsim {

void validate(const SpmConfig& cfg) {
  if (!is_pow2(cfg.num_banks)) throw ConfigError("spm: num_banks must be a power of two");
  if (cfg.word_bytes == 0 || !is_pow2(cfg.word_bytes)) throw ConfigError("spm: word_bytes must be a power of two");
  if (cfg.total_bytes == 0 || cfg.total_bytes % cfg.num_banks != 0) {
    throw ConfigError("spm: total_bytes must be a multiple of num_banks");
  }
  if (cfg.bank_bytes() % cfg.word_bytes != 0) throw ConfigError("spm: bank size must be a multiple of word_bytes");
  if (cfg.ports < 1) throw ConfigError("spm: at least one port required");
  for (std::size_t i = 0; i < cfg.alias_windows.size(); ++i) {
    const auto& a = cfg.alias_windows[i];
    if (a.port >= cfg.ports) throw ConfigError("spm: alias window routed to a nonexistent port");
    for (std::size_t j = i + 1; j < cfg.alias_windows.size(); ++j) {
      const auto& b = cfg.alias_windows[j];
      if (!(a.base + cfg.total_bytes <= b.base || b.base + cfg.total_bytes <= a.base)) {
        std::ostringstream os;
        os << "spm: alias windows at 0x" << std::hex << a.base << " and 0x" << b.base << " overlap";
        throw ConfigError(os.str());
      }
    }
  }
}

std::optional<SpmLocation> spm_decode(const SpmConfig& cfg, Addr addr) {
  for (const auto& w : cfg.alias_windows) {
    if (addr < w.base || addr - w.base >= cfg.total_bytes) continue;
    const std::uint64_t off = addr - w.base;
    SpmLocation loc;
    loc.mode = w.mode;
    loc.port = w.port;
    if (w.mode == SpmMode::Interleaved) {
      const std::uint64_t word = off / cfg.word_bytes;
      loc.bank = static_cast<std::uint32_t>(word % cfg.num_banks);
      loc.offset = (word / cfg.num_banks) * cfg.word_bytes + off % cfg.word_bytes;
    } else {
      loc.bank = static_cast<std::uint32_t>(off / cfg.bank_bytes());
      loc.offset = off % cfg.bank_bytes();
    }
    return loc;
  }
  return std::nullopt;
}

Dcspm::Dcspm(SpmConfig cfg)
    : cfg_(std::move(cfg)),
      banks_(cfg_.num_banks),
      bank_rr_(cfg_.num_banks, RoundRobin(cfg_.ports)),
      port_rr_(cfg_.ports, RoundRobin(2)),
      storage_(cfg_.total_bytes, 0) {
  validate(cfg_);
}

std::vector<bool> Dcspm::service(std::span<const SpmBeat> beats, Cycle cycle) {
  std::vector<bool> served(beats.size(), false);
  std::vector<std::optional<SpmLocation>> loc(beats.size());
  for (std::size_t i = 0; i < beats.size(); ++i) {
    loc[i] = spm_decode(cfg_, beats[i].addr);
    if (!loc[i]) throw ConfigError("spm: beat outside every alias window");
  }

  // Port stage: one beat per port, read/write round-robin.
  std::vector<std::ptrdiff_t> port_pick(cfg_.ports, -1);
  for (std::uint32_t p = 0; p < cfg_.ports; ++p) {
    std::ptrdiff_t by_op[2] = {-1, -1};
    for (std::size_t i = 0; i < beats.size(); ++i) {
      if (beats[i].port == p) by_op[beats[i].op == Op::Read ? 0 : 1] = static_cast<std::ptrdiff_t>(i);
    }
    const auto pick = port_rr_[p].pick([&](std::size_t k) { return by_op[k] >= 0; });
    if (!pick) continue;
    port_pick[p] = by_op[*pick];
    const std::ptrdiff_t other = by_op[1 - *pick];
    if (other >= 0) ++port_stalls_;
  }

  // Bank stage: one port per bank, round-robin across ports.
  std::uint32_t count = 0;
  for (std::uint32_t b = 0; b < cfg_.num_banks; ++b) {
    std::vector<std::ptrdiff_t> by_port(cfg_.ports, -1);
    std::uint32_t contenders = 0;
    for (std::uint32_t p = 0; p < cfg_.ports; ++p) {
      const auto i = port_pick[p];
      if (i >= 0 && loc[static_cast<std::size_t>(i)]->bank == b) {
        by_port[p] = i;
        ++contenders;
      }
    }
    if (contenders == 0) continue;
    const auto winner = bank_rr_[b].pick([&](std::size_t p) { return by_port[p] >= 0; });
    const auto i = static_cast<std::size_t>(by_port[*winner]);
    served[i] = true;
    bank_rr_[b].served(*winner);
    port_rr_[beats[i].port].served(beats[i].op == Op::Read ? 0 : 1);
    banks_[b].busy_until = cycle + 1;
    ++banks_[b].serviced;
    banks_[b].conflict_count += contenders - 1;
    ++count;
  }
  peak_ = std::max(peak_, count);
  return served;
}

std::uint64_t Dcspm::physical(Addr addr) const {
  const auto loc = spm_decode(cfg_, addr);
  if (!loc) throw ConfigError("spm: functional access outside every alias window");
  return std::uint64_t{loc->bank} * cfg_.bank_bytes() + loc->offset;
}

void Dcspm::write(Addr addr, std::span<const std::uint8_t> bytes) {
  for (std::size_t i = 0; i < bytes.size(); ++i) storage_[physical(addr + i)] = bytes[i];
}

void Dcspm::read(Addr addr, std::span<std::uint8_t> bytes) const {
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = storage_[physical(addr + i)];
}

std::uint64_t Dcspm::total_conflicts() const {
  std::uint64_t n = 0;
  for (const auto& b : banks_) n += b.conflict_count;
  return n;
}

}  // namespace mcsim
