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
#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "mcsim/transport.hpp"
#include "mcsim/types.hpp"

namespace mcsim {

/// AXI4 INCR burst length limit.
inline constexpr std::uint32_t kMaxBurstBeats = 256;

enum class TaskKind : std::uint8_t { StrideReader, DmaLinear, DoubleBufferedAccel };

const char* to_string(TaskKind k);
TaskKind task_kind_from_string(const std::string& s);

struct TaskSpec {
  std::string name;
  TaskKind kind = TaskKind::StrideReader;
  InitiatorId initiator = 0;
  Criticality criticality = Criticality::NonCritical;
  PartId part_id = 0;
  Cycle start = 0;
  std::uint32_t beat_bytes = 8;
  Cycle write_data_interval = 1;  ///< cycles between write-data beats at the initiator

  // StrideReader
  Addr base = 0;
  std::uint64_t stride = 64;
  std::uint64_t count = 0;
  std::uint32_t passes = 1;
  Cycle gap_cycles = 0;  ///< think time between a completion and the next issue

  // DmaLinear
  Addr src = 0;
  Addr dst = 0;
  std::uint64_t bytes = 0;
  std::uint32_t burst_beats = 16;
  std::uint32_t outstanding = 4;
  bool loop = false;  ///< restart forever; the task then never completes on its own

  // DoubleBufferedAccel (reads tiles from `base`)
  std::uint64_t tile_bytes = 0;
  std::uint32_t num_tiles = 1;
  Cycle compute_cycles_per_tile = 0;
  bool amr_compute = false;  ///< compute time comes from the AMR cluster model
  std::uint64_t units_per_tile = 0;

  [[nodiscard]] bool daemon() const { return kind == TaskKind::DmaLinear && loop; }
  /// Largest burst the task issues in each direction (0 = never).
  [[nodiscard]] std::uint32_t max_burst(Op dir) const;
};

void validate(const TaskSpec& spec);

// ---------------------------------------------------------------------------
// Pure generators (address streams without timing)

[[nodiscard]] std::vector<Transaction> gen_stride_reader(const TaskSpec& spec);

struct DmaStream {
  std::vector<Transaction> reads;
  std::vector<Transaction> writes;
};
[[nodiscard]] DmaStream gen_dma_linear(const TaskSpec& spec);

/// Tile schedule of a two-buffer pipeline with fixed per-tile transfer and
/// compute times. Tile i+1 loads while tile i computes; a load waits for
/// the buffer it overwrites.
struct DoubleBufferPlan {
  std::vector<Cycle> load_end;
  std::vector<Cycle> compute_end;
  [[nodiscard]] Cycle completion() const { return compute_end.empty() ? 0 : compute_end.back(); }
};
[[nodiscard]] DoubleBufferPlan double_buffer_plan(Cycle transfer_per_tile, Cycle compute_per_tile,
                                                  std::uint32_t num_tiles);

// ---------------------------------------------------------------------------
// Runtime tasks

struct AccessRecord {
  Cycle issue;
  Cycle complete;
  std::uint32_t phase;  ///< pass (stride reader) or tile (accelerator)
};

struct TaskStats {
  Cycle started = kNever;
  Cycle finished = kNever;
  std::uint64_t transactions = 0;
  std::uint64_t beats = 0;
  std::uint64_t decode_errors = 0;
  std::uint32_t phases = 0;  ///< passes / tiles / DMA iterations completed
  std::vector<AccessRecord> accesses;
};

/// Computes the compute-phase length of `tile` starting at `start`.
using ComputeModel = std::function<Cycle(std::uint32_t tile, Cycle start)>;

/// A traffic source driven by the system tick. Transactions stay owned by
/// the task until completion.
class Task {
 public:
  explicit Task(TaskSpec spec) : spec_(std::move(spec)) {}
  virtual ~Task() = default;
  Task(const Task&) = delete;
  Task& operator=(const Task&) = delete;

  /// Returns a new transaction for `dir` if one may be issued at `now`.
  virtual Transaction* issue(Op dir, Cycle now) = 0;
  /// `now` is the transaction's completion cycle.
  virtual void complete(Transaction* txn, Cycle now) = 0;
  /// Advances time-driven state (compute phases).
  virtual void advance(Cycle /*now*/) {}
  [[nodiscard]] virtual bool finished() const = 0;
  /// Earliest cycle after `now` at which time alone could unblock the task.
  [[nodiscard]] virtual Cycle next_wake(Cycle now) const = 0;

  [[nodiscard]] const TaskSpec& spec() const { return spec_; }
  [[nodiscard]] const TaskStats& stats() const { return stats_; }
  [[nodiscard]] std::size_t in_flight() const { return live_.size(); }

 protected:
  Transaction* make(Op op, Addr addr, std::uint32_t beats, Cycle now);
  void retire(Transaction* txn, std::uint32_t phase);

  TaskSpec spec_;
  TaskStats stats_;
  std::uint64_t seq_ = 0;
  std::unordered_map<TxnId, std::unique_ptr<Transaction>> live_;
};

[[nodiscard]] std::unique_ptr<Task> make_task(const TaskSpec& spec, ComputeModel compute = {});

}  // namespace mcsim
