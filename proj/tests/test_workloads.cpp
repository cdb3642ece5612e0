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

#include <vector>

#include "mcsim/tsu.hpp"
#include "mcsim/workloads.hpp"

namespace mcsim {
namespace {

TaskSpec stride(Addr base, Addr step, std::uint64_t count) {
  TaskSpec s;
  s.name = "tct";
  s.kind = TaskKind::StrideReader;
  s.base = base;
  s.stride = step;
  s.count = count;
  return s;
}

TEST(StrideReader, ArithmeticAddressSequence) {
  const auto txns = gen_stride_reader(stride(0, 64, 4));
  ASSERT_EQ(txns.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(txns[i].addr, 64 * i);
    EXPECT_EQ(txns[i].op, Op::Read);
    EXPECT_EQ(txns[i].beats, 1u);
  }
}

TEST(StrideReader, LineStrideTouchesDistinctLines) {
  const auto txns = gen_stride_reader(stride(0x8000'0000, 64, 100));
  std::vector<Addr> lines;
  for (const auto& t : txns) lines.push_back(t.addr / 64);
  for (std::size_t i = 1; i < lines.size(); ++i) EXPECT_NE(lines[i], lines[i - 1]);
}

TEST(StrideReader, ZeroCountIsEmpty) { EXPECT_TRUE(gen_stride_reader(stride(0, 64, 0)).empty()); }

TaskSpec dma(std::uint64_t bytes, std::uint32_t burst) {
  TaskSpec s;
  s.name = "dma";
  s.kind = TaskKind::DmaLinear;
  s.src = 0x8000'0000;
  s.dst = 0x1000'0000;
  s.bytes = bytes;
  s.burst_beats = burst;
  return s;
}

TEST(DmaLinear, FourKibInSixteenBeatBursts) {
  const auto s = gen_dma_linear(dma(4096, 16));
  EXPECT_EQ(s.reads.size(), 32u);
  EXPECT_EQ(s.writes.size(), 32u);
  for (std::size_t i = 0; i < 32; ++i) {
    EXPECT_EQ(s.reads[i].addr, 0x8000'0000 + 128 * i);
    EXPECT_EQ(s.writes[i].addr, 0x1000'0000 + 128 * i);
    EXPECT_EQ(s.writes[i].op, Op::Write);
  }
}

TEST(DmaLinear, SingleBurstTransfer) {
  const auto s = gen_dma_linear(dma(128, 16));
  EXPECT_EQ(s.reads.size(), 1u);
  EXPECT_EQ(s.writes.size(), 1u);
}

TEST(DmaLinear, SplitBurstsAppearAsFragments) {
  const auto s = gen_dma_linear(dma(4096, 16));
  std::size_t frags = 0;
  for (const auto& t : s.reads) frags += gbs_split(t, 4).size();
  EXPECT_EQ(frags, 4u * 32u);
}

TEST(DoubleBuffer, ComputeBoundPipeline) {
  EXPECT_EQ(double_buffer_plan(50, 100, 10).completion(), 50u + 10u * 100u);
}

TEST(DoubleBuffer, MemoryBoundPipeline) {
  EXPECT_EQ(double_buffer_plan(200, 100, 10).completion(), 10u * 200u + 100u);
}

TEST(DoubleBuffer, SingleTileIsSequential) {
  const auto p = double_buffer_plan(70, 30, 1);
  EXPECT_EQ(p.load_end, (std::vector<Cycle>{70}));
  EXPECT_EQ(p.completion(), 100u);
}

TEST(DoubleBuffer, LoadWaitsForTheBufferItOverwrites) {
  const auto p = double_buffer_plan(10, 100, 4);
  // Tile 2 reuses tile 0's buffer, so its load cannot end before compute 0 does.
  EXPECT_GE(p.load_end[2], p.compute_end[0] + 10);
}

TEST(TaskSpec, ValidateRejectsBadShapes) {
  TaskSpec s = dma(100, 16);
  EXPECT_THROW(validate(s), ConfigError);
  s = dma(4096, 0);
  EXPECT_THROW(validate(s), ConfigError);
  s = dma(4096, 300);
  EXPECT_THROW(validate(s), ConfigError);
  EXPECT_NO_THROW(validate(dma(4096, 256)));
}

TEST(TaskKind, StringRoundTrip) {
  for (TaskKind k : {TaskKind::StrideReader, TaskKind::DmaLinear, TaskKind::DoubleBufferedAccel}) {
    EXPECT_EQ(task_kind_from_string(to_string(k)), k);
  }
  EXPECT_THROW((void)task_kind_from_string("nope"), ConfigError);
}

}  // namespace
}  // namespace mcsim
