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

#include <gtest/gtest.h>

#include <array>
#include <cstdint>
#include <vector>

#include "mcsim/dpllc.hpp"
#include "mcsim/rng.hpp"

namespace mcsim {
namespace {

LlcConfig two_parts() {
  LlcConfig c;
  c.partition_table = {{0, {0, 8}}, {1, {8, 4}}, {2, {12, 4}}};
  return c;
}

TEST(HyperRam, LineFillTakesLatencyPlusBeats) {
  HyperRam ram(HyperRamConfig{});
  EXPECT_EQ(ram.access(8, 0, 0), 40u);
}

TEST(HyperRam, SameChannelSerializesOtherChannelDoesNot) {
  HyperRam ram(HyperRamConfig{});
  EXPECT_EQ(ram.access(8, 0, 0), 40u);
  EXPECT_EQ(ram.access(8, 0, 0), 80u);
  EXPECT_EQ(ram.access(8, 0, 1), 40u);
  EXPECT_EQ(ram.accesses(), 3u);
}

TEST(Llc, PartitionSetIndex) {
  Llc llc(two_parts(), HyperRamConfig{});
  // line 0x41 -> 8 + (0x41 mod 4) = 9
  EXPECT_EQ(llc.set_index(0x1040, 1), 9u);
  EXPECT_EQ(llc.set_index(0x1040, 0), 1u);
  // Unknown ids fall back to the default partition.
  EXPECT_EQ(llc.set_index(0x1040, 77), llc.set_index(0x1040, 0));
}

TEST(Llc, MissThenHit) {
  Llc llc(two_parts(), HyperRamConfig{});
  const auto miss = llc.lookup(0x2000, 1, Op::Read, 100);
  EXPECT_FALSE(miss.hit);
  EXPECT_EQ(miss.ready, 140u);
  const auto hit = llc.lookup(0x2008, 1, Op::Read, 150);
  EXPECT_TRUE(hit.hit);
  EXPECT_EQ(hit.ready, 150u);
  EXPECT_EQ(llc.counters(1).misses, 1u);
  EXPECT_EQ(llc.counters(1).hits, 1u);
}

TEST(Llc, LruEvictionAndDirtyWriteback) {
  LlcConfig c = two_parts();
  Llc llc(c, HyperRamConfig{});
  // Nine lines mapping to set 8 of partition 1 (stride 4 lines) overflow its 8 ways.
  const Addr stride = 4 * 64;
  (void)llc.lookup(0, 1, Op::Write, 0);
  for (Addr k = 1; k <= 8; ++k) (void)llc.lookup(k * stride, 1, Op::Read, 0);
  EXPECT_EQ(llc.counters(1).evictions, 1u);
  EXPECT_EQ(llc.counters(1).writebacks, 1u);
  EXPECT_FALSE(llc.lookup(0, 1, Op::Read, 1000).hit);
}

TEST(Llc, FlushCountsValidLinesAndWarnsOnUnknownPart) {
  Llc llc(two_parts(), HyperRamConfig{});
  for (Addr k = 0; k < 5; ++k) (void)llc.lookup(k * 64, 2, Op::Read, 0);
  EXPECT_EQ(llc.flush_partition(2, 10), 5u);
  EXPECT_EQ(llc.flush_partition(2, 11), 0u);
  EXPECT_EQ(llc.counters(2).flushes, 5u);
  EXPECT_EQ(llc.flush_partition(9, 12), 0u);
  EXPECT_EQ(llc.warnings().size(), 1u);
}

std::vector<Addr> random_stream(std::uint64_t seed, std::size_t n, Addr span) {
  std::mt19937_64 rng(seed);
  std::vector<Addr> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(draw_below(rng, span / 64) * 64);
  return out;
}

TEST(Llc, DisjointPartitionsMissCountsMatchSoloRuns) {
  const auto a = random_stream(1, 2000, 64 * 1024);
  const auto b = random_stream(2, 2000, 64 * 1024);
  auto solo = [](const std::vector<Addr>& s, PartId p) {
    Llc llc(two_parts(), HyperRamConfig{});
    for (Addr x : s) (void)llc.lookup(x, p, Op::Read, 0);
    return llc.counters(p);
  };
  const auto solo_a = solo(a, 1);
  const auto solo_b = solo(b, 2);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    Llc llc(two_parts(), HyperRamConfig{});
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.size() || j < b.size()) {
      const bool take_a = j == b.size() || (i < a.size() && draw_below(rng, 2) == 0);
      if (take_a) {
        (void)llc.lookup(a[i++], 1, Op::Read, 0);
      } else {
        (void)llc.lookup(b[j++], 2, Op::Read, 0);
      }
    }
    EXPECT_EQ(llc.counters(1), solo_a);
    EXPECT_EQ(llc.counters(2), solo_b);
    EXPECT_TRUE(llc.inclusion_holds());
  }
}

TEST(Llc, FlushOfOnePartitionLeavesOtherUntouched) {
  const auto b = random_stream(5, 1000, 16 * 1024);
  auto run = [&](bool flush) {
    Llc llc(two_parts(), HyperRamConfig{});
    for (std::size_t k = 0; k < b.size(); ++k) {
      (void)llc.lookup(k * 64, 1, Op::Write, 0);
      if (flush && k % 50 == 0) (void)llc.flush_partition(1, k);
      (void)llc.lookup(b[k], 2, Op::Read, 0);
    }
    return std::pair{llc.counters(2), llc.state_digest({12, 4})};
  };
  EXPECT_EQ(run(true), run(false));
}

TEST(Llc, ReprogramWithResidentLinesIsAViolation) {
  Llc llc(two_parts(), HyperRamConfig{});
  (void)llc.lookup(0x40, 1, Op::Read, 0);
  PartitionTable t = two_parts().partition_table;
  t[2] = {12, 2};
  llc.reprogram(t, 5);
  EXPECT_EQ(llc.reprogram_violations(), 0u);
  t[1] = {8, 2};
  llc.reprogram(t, 6);
  EXPECT_EQ(llc.reprogram_violations(), 1u);
  EXPECT_EQ(llc.valid_lines(1), 0u);
}

TEST(Llc, DataRoundTripsThroughEvictions) {
  Llc llc(two_parts(), HyperRamConfig{});
  for (std::uint8_t k = 0; k < 40; ++k) {
    const std::array<std::uint8_t, 4> v{k, static_cast<std::uint8_t>(k + 1), 7, 9};
    llc.write_bytes(0x8000'0000ULL + k * 256, 1, v);
  }
  for (std::uint8_t k = 0; k < 40; ++k) {
    std::array<std::uint8_t, 4> v{};
    llc.read_bytes(0x8000'0000ULL + k * 256, 1, v);
    EXPECT_EQ(v[0], k);
    EXPECT_EQ(v[1], k + 1);
  }
}

TEST(Llc, ValidateRejectsOverlapAndMissingDefault) {
  LlcConfig c;
  c.partition_table = {{0, {0, 8}}, {1, {4, 8}}};
  EXPECT_THROW(validate(c), ConfigError);
  c.partition_table = {{1, {0, 8}}};
  EXPECT_THROW(validate(c), ConfigError);
}

}  // namespace
}  // namespace mcsim
