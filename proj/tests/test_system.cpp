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

#include <string>
#include <vector>

#include <json.hpp>

#include "mcsim/scenario.hpp"

namespace mcsim {
namespace {

using nlohmann::json;

json one_task(json task) {
  json d;
  d["name"] = "sys";
  d["run_limit"] = 1'000'000;
  d["tasks"] = json::array({std::move(task)});
  return d;
}

std::vector<Cycle> latencies(const RunResult& r, std::size_t task) {
  std::vector<Cycle> out;
  for (const auto& a : r.tasks.at(task).accesses) out.push_back(a.complete - a.issue);
  return out;
}

RunResult run(const json& doc) { return run_variant(parse_scenario(doc), "v").run; }

const json kNonBinding = {{"gbs_on", true}, {"split_beats", 4}, {"wb_on", true}, {"tru_on", true},
                          {"budget_beats", 64}, {"period_cycles", 16}};

void expect_zero_overhead(const json& task) {
  json off = one_task(task);
  json on = off;
  on["tsu"][task["name"].get<std::string>()] = kNonBinding;
  const auto a = latencies(run(off), 0);
  const auto b = latencies(run(on), 0);
  ASSERT_EQ(a.size(), b.size());
  ASSERT_FALSE(a.empty());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_LE(b[i], a[i] + 1) << "access " << i;
  }
}

TEST(ZeroOverhead, SingleBeatReadsToScratchpad) {
  expect_zero_overhead({{"name", "r"}, {"kind", "stride_reader"}, {"base", "0x10000000"}, {"stride", 8}, {"count", 200}});
}

TEST(ZeroOverhead, SingleBeatReadsThroughCache) {
  expect_zero_overhead({{"name", "r"}, {"kind", "stride_reader"}, {"base", "0x80000000"}, {"stride", 64}, {"count", 200}, {"passes", 2}});
}

TEST(ZeroOverhead, SingleBeatWrites) {
  expect_zero_overhead({{"name", "w"}, {"kind", "dma_linear"}, {"src", "0x10000000"}, {"dst", "0x10080000"},
                        {"bytes", 2048}, {"burst_beats", 1}, {"outstanding", 1}});
}

TEST(ZeroOverhead, SplitBurstReads) {
  expect_zero_overhead({{"name", "a"}, {"kind", "double_buffered"}, {"base", "0x10000000"}, {"tile_bytes", 1024},
                        {"num_tiles", 8}, {"burst_beats", 16}, {"compute_cycles_per_tile", 50}});
}

TEST(ZeroOverhead, SplitBurstReadsThroughCache) {
  // Fragments the TRU releases back to back must share the line fills.
  expect_zero_overhead({{"name", "a"}, {"kind", "double_buffered"}, {"base", "0x80000000"}, {"tile_bytes", 1024},
                        {"num_tiles", 8}, {"burst_beats", 16}, {"compute_cycles_per_tile", 50}});
}

TEST(System, FootprintOutsideWindowsIsRejectedStatically) {
  json d = one_task({{"name", "r"}, {"kind", "stride_reader"}, {"base", "0x100FFFC0"}, {"stride", 64}, {"count", 4}});
  EXPECT_THROW((void)parse_scenario(d), ScenarioError);
}

TEST(System, DecodeErrorCompletesAndSimulationContinues) {
  // Built directly so the static footprint check does not intercept it:
  // the last two reads fall past the end of the scratchpad window.
  Scenario sc = parse_scenario(
      one_task({{"name", "r"}, {"kind", "stride_reader"}, {"base", "0x10000000"}, {"stride", 64}, {"count", 4}}));
  sc.tasks[0].base = 0x1010'0000 - 128;
  Soc soc(sc.soc, sc.tasks, sc.tsu);
  const auto r = soc.run(10000);
  EXPECT_FALSE(r.timeout);
  EXPECT_EQ(r.decode_errors, 2u);
  EXPECT_EQ(r.tasks[0].decode_errors, 2u);
  EXPECT_EQ(r.tasks[0].transactions, 4u);
  EXPECT_NE(r.tasks[0].finished, kNever);
}

TEST(System, AtomicBurstBlocksSingleBeatReader) {
  json d;
  d["name"] = "blk";
  d["run_limit"] = 100000;
  d["tasks"] = json::array({
      {{"name", "big"}, {"kind", "double_buffered"}, {"base", "0x10000000"}, {"tile_bytes", 128}, {"num_tiles", 64},
       {"burst_beats", 16}, {"compute_cycles_per_tile", 1}},
      {{"name", "small"}, {"kind", "stride_reader"}, {"base", "0x10080000"}, {"stride", 8}, {"count", 64}, {"gap_cycles", 3}},
  });
  const auto r = run(d);
  const auto lat = latencies(r, 1);
  Cycle worst = 0;
  for (Cycle l : lat) worst = std::max(worst, l);
  const auto solo = latencies(run_isolated(parse_scenario(d)).run, 1);
  // A single beat can wait behind at most one whole 16-beat burst.
  EXPECT_GT(worst, solo.front());
  EXPECT_LE(worst, solo.front() + 16);

  d["tsu"]["big"] = {{"gbs_on", true}, {"split_beats", 4}};
  Cycle worst_split = 0;
  for (Cycle l : latencies(run(d), 1)) worst_split = std::max(worst_split, l);
  EXPECT_LE(worst_split, solo.front() + 4);
}

json cache_pair(bool partitioned) {
  json d;
  d["name"] = "iso";
  d["run_limit"] = 2'000'000;
  d["llc"]["partition_table"] = partitioned ? json{{"0", {{"base_set", 0}, {"num_sets", 128}}}, {"1", {{"base_set", 128}, {"num_sets", 128}}}}
                                            : json{{"0", {{"base_set", 0}, {"num_sets", 256}}}};
  d["tasks"] = json::array({
      {{"name", "crit"}, {"kind", "stride_reader"}, {"criticality", "critical"}, {"part_id", 0}, {"base", "0x80000000"},
       {"stride", 64}, {"count", 900}, {"passes", 3}, {"gap_cycles", 30}},
      {{"name", "noise"}, {"kind", "dma_linear"}, {"part_id", partitioned ? 1 : 0}, {"src", "0x80400000"},
       {"dst", "0x10000000"}, {"bytes", 262144}, {"burst_beats", 16}, {"loop", true}},
  });
  return d;
}

TEST(System, DedicatedPartitionKeepsIsolatedMissCount) {
  const auto sc = parse_scenario(cache_pair(true));
  const auto iso = run_isolated(sc).run;
  const auto shared = run_variant(sc, "p").run;
  EXPECT_EQ(shared.task_llc_misses[0], iso.task_llc_misses[0]);
  EXPECT_EQ(iso.task_llc_misses[0], 900u);
}

TEST(System, SharedPartitionAddsMisses) {
  const auto sc = parse_scenario(cache_pair(false));
  const auto iso = run_isolated(sc).run;
  const auto shared = run_variant(sc, "s").run;
  EXPECT_GT(shared.task_llc_misses[0], iso.task_llc_misses[0]);
}

TEST(System, RunsAreDeterministic) {
  const auto sc = parse_scenario(cache_pair(false));
  const auto a = run_variant(sc, "x").run;
  const auto b = run_variant(sc, "x").run;
  EXPECT_EQ(a.cycles, b.cycles);
  EXPECT_EQ(latencies(a, 0), latencies(b, 0));
  EXPECT_EQ(a.events_dispatched, b.events_dispatched);
  EXPECT_EQ(a.task_llc_misses, b.task_llc_misses);
}

TEST(System, MidRunTsuReconfigurationTakesEffect) {
  json d = cache_pair(true);
  d["tsu"]["noise"] = {{"tru_on", true}, {"budget_beats", 16}, {"period_cycles", 16}};
  json slowed = d;
  slowed["events"] = json::array({{{"cycle", 1000}, {"action", "tsu"}, {"task", "noise"},
                                   {"config", {{"tru_on", true}, {"budget_beats", 1}, {"period_cycles", 64}}}}});
  const auto fast = run(d);
  const auto slow = run(slowed);
  EXPECT_LT(slow.tasks[1].beats, fast.tasks[1].beats);
  bool seen = false;
  for (const auto& e : slow.events) seen = seen || (e.component == "tsu" && e.kind == "reconfigure");
  EXPECT_TRUE(seen);
}

TEST(System, FlushEventInvalidatesPartition) {
  json d = cache_pair(true);
  d["events"] = json::array({{{"cycle", 50000}, {"action", "llc_flush"}, {"part_id", 0}}});
  const auto r = run(d);
  EXPECT_GT(r.llc.at(0).flushes, 0u);
  EXPECT_GT(r.task_llc_misses[0], 900u);
}

TEST(System, RegulatedTransactionsMeetTheirBound) {
  json d = cache_pair(false);
  d["tsu"]["crit"] = {{"gbs_on", true}, {"split_beats", 8}, {"tru_on", true}, {"budget_beats", 4}, {"period_cycles", 8}};
  d["tsu"]["noise"] = {{"gbs_on", true}, {"split_beats", 8}, {"wb_on", true}, {"tru_on", true}, {"budget_beats", 8}, {"period_cycles", 100}};
  const auto r = run(d);
  EXPECT_GT(r.bounds.checked, 1000u);
  EXPECT_EQ(r.bounds.violations, 0u);
}

TEST(System, SlowDirectWritesMeetTheirBound) {
  json d = one_task({{"name", "w"}, {"kind", "dma_linear"}, {"src", "0x10000000"}, {"dst", "0x80000000"},
                     {"bytes", 16384}, {"burst_beats", 16}, {"outstanding", 1}, {"write_data_interval", 3}});
  d["tsu"]["w"] = {{"gbs_on", true}, {"split_beats", 4}, {"tru_on", true}, {"budget_beats", 6}, {"period_cycles", 20}};
  const auto r = run(d);
  EXPECT_GT(r.bounds.checked, 100u);
  EXPECT_EQ(r.bounds.violations, 0u);
}

}  // namespace
}  // namespace mcsim
