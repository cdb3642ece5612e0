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

#include <array>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <vector>

#include "mcsim/transport.hpp"
#include "mcsim/types.hpp"

namespace mcsim {

/// Programmable traffic shaper settings for one initiator port: granular
/// burst splitter (GBS), write buffer (WB) and traffic regulation unit (TRU).
struct TsuConfig {
  std::uint32_t split_beats = 0;  ///< max beats per fragment, 0 = no splitting
  std::uint32_t wb_depth_beats = 16;
  std::uint32_t budget_beats = 1;  ///< beats released per period
  Cycle period_cycles = 1;
  bool gbs_on = false;
  bool wb_on = false;
  bool tru_on = false;
  bool joint_budget = true;  ///< reads and writes draw from one budget

  [[nodiscard]] bool bypass() const { return !gbs_on && !wb_on && !tru_on; }
  [[nodiscard]] std::uint32_t effective_split() const { return gbs_on ? split_beats : 0; }
};

void validate(const TsuConfig& cfg);

struct TruState {
  Cycle period_start = 0;
  std::uint32_t budget_left = 0;
};

[[nodiscard]] TruState tru_init(const TsuConfig& cfg, Cycle start);

/// Advances `state` to the period containing `cycle` (refilling the budget
/// if a boundary was crossed; unused budget is dropped).
void tru_refresh(TruState& state, const TsuConfig& cfg, Cycle cycle);

/// Grants min(want, budget_left) beats at `cycle` and charges them.
std::uint32_t tru_grant(TruState& state, const TsuConfig& cfg, std::uint32_t want, Cycle cycle);

[[nodiscard]] inline Cycle tru_next_refill(const TruState& state, const TsuConfig& cfg) {
  return state.period_start + cfg.period_cycles;
}

/// Splits `txn` into ceil(beats / split_beats) in-order fragments.
/// split_beats == 0 returns the transaction unchanged.
[[nodiscard]] std::vector<Transaction> gbs_split(const Transaction& txn, std::uint32_t split_beats);

/// Holds write data until a whole fragment is present so the shared W path
/// is never held by a half-delivered burst. A fragment larger than the
/// buffer becomes eligible once the buffer is full.
class WriteBuffer {
 public:
  struct Entry {
    TxnId txn_id = 0;
    std::uint32_t fragment = 0;
    std::uint32_t beats = 0;
    std::uint32_t received = 0;
    std::uint32_t drained = 0;
  };

  explicit WriteBuffer(std::uint32_t depth_beats) : depth_(depth_beats) {}

  /// Stores one beat of (txn, fragment). Returns false (back-pressure) when
  /// the buffer is full. Beats of a fragment must be offered in order.
  bool offer_beat(TxnId txn_id, std::uint32_t fragment, std::uint32_t fragment_beats,
                  std::uint32_t beat_index, Cycle cycle);

  /// True if the oldest fragment may be forwarded downstream.
  [[nodiscard]] bool head_eligible() const;
  [[nodiscard]] const Entry* head() const { return entries_.empty() ? nullptr : &entries_.front(); }
  [[nodiscard]] bool can_drain() const;
  /// Removes one beat of the head fragment. Returns true if the head is done.
  bool drain_beat(Cycle cycle);

  [[nodiscard]] std::uint32_t occupancy() const { return occupancy_; }
  [[nodiscard]] std::uint32_t depth() const { return depth_; }
  [[nodiscard]] bool empty() const { return entries_.empty(); }

 private:
  std::uint32_t depth_;
  std::uint32_t occupancy_ = 0;
  std::deque<Entry> entries_;
};

/// Worst-case downstream cost of one released request.
struct ServiceModel {
  Cycle cycles_per_beat = 1;
  Cycle per_request = 0;  ///< crossbar blocking by other initiators' bursts
  Cycle per_line = 0;     ///< extra cost for each cache line touched
  std::uint32_t line_bytes = 0;

  [[nodiscard]] Cycle cost(Addr addr, std::uint32_t beats, std::uint32_t beat_bytes) const;
};

/// Shaper state seen by a transaction at its issue handshake.
struct BoundContext {
  std::uint32_t budget_left = 0;
  Cycle cycles_to_refill = 1;
  /// Cycle (relative to issue) by which the previous in-flight request of the
  /// same direction has moved its last beat; negative when none.
  std::int64_t predecessor_done = -1;
  /// Largest request the other direction may release from a joint budget;
  /// 0 when there is no competing direction.
  std::uint32_t rival_beats = 0;
  /// Whether this direction leads the joint budget in the period that
  /// starts at the next refill (priority alternates every period).
  bool priority_at_refill = false;
  /// Cycles between write-data beats entering the write buffer; 0 when the
  /// write buffer is not in the path.
  Cycle write_data_interval = 0;
  /// Cycle (relative to issue) at which the first write-data beat arrives.
  Cycle write_data_start = 0;
  /// An earlier transaction's data was still entering the write buffer at issue.
  bool data_pending = false;
};

/// Analytic completion bound for a regulated transaction issued with a
/// fresh budget: each budget-sized chunk starts no earlier than its period
/// and is serviced at `service_cycles_per_beat`.
[[nodiscard]] Cycle tsu_latency_bound(const TsuConfig& cfg, std::uint32_t txn_beats,
                                      Cycle service_cycles_per_beat);

/// General form: accounts for the TRU phase at issue, an in-flight
/// predecessor, write-buffer fill, crossbar blocking and a competing
/// direction on a joint budget.
[[nodiscard]] Cycle tsu_latency_bound(const TsuConfig& cfg, const Transaction& txn,
                                      const ServiceModel& service, const BoundContext& ctx);

/// Shaper state recorded at each issue handshake (for bound checking).
struct IssueSnapshot {
  std::uint32_t budget_left = 0;
  Cycle cycles_to_refill = 1;
  bool has_predecessor = false;
  Cycle predecessor_release = 0;
  Addr predecessor_addr = 0;
  std::uint32_t predecessor_beats = 0;
  Cycle write_data_start = 0;  ///< relative to issue
  bool priority_at_refill = false;  ///< leads the joint budget from the next refill on
  bool data_pending = false;        ///< an earlier transaction's data is still entering the WB
  bool regulated = false;
};

/// Runtime TSU for one initiator port. Read and write directions are
/// independent AXI paths; each holds at most one transaction being released
/// and at most one request in flight downstream.
class Shaper {
 public:
  Shaper(InitiatorId id, const TsuConfig& cfg, Cycle now);

  /// Models software reprogramming of the TSU registers. Takes effect for
  /// requests released from `now` on; the TRU period restarts at `now`.
  void reconfigure(const TsuConfig& cfg, Cycle now);
  [[nodiscard]] const TsuConfig& config() const { return cfg_; }

  [[nodiscard]] bool input_free(Op dir) const { return path(dir).txn == nullptr; }

  /// Issue handshake. `txn` must outlive its completion.
  IssueSnapshot accept(Transaction* txn, Cycle now, Cycle write_data_interval);

  /// Release phase: returns the requests entering arbitration this cycle.
  std::vector<Request*> release(Cycle now);

  /// True if the in-flight write request may move its next beat this cycle.
  [[nodiscard]] bool write_beat_ready(const Request& req, Cycle now) const;
  void on_beat(const Request& req, Cycle now);
  /// Called after the last beat of a released request. Returns true if that
  /// request completed its transaction.
  bool on_request_done(Request* req, Cycle now);

  /// WB fill phase: initiator write data lands in the buffer.
  void fill(Cycle now);

  /// Beats of the current `dir` transaction, past the in-flight request,
  /// that the TRU would release without waiting for a refill. Their address
  /// phases are already visible downstream.
  [[nodiscard]] std::uint32_t lookahead_beats(Op dir, Cycle now) const;
  /// Joint budget: which direction is released first in the period holding `cycle`.
  [[nodiscard]] bool has_priority(Op dir, Cycle cycle) const;

  [[nodiscard]] bool idle() const;
  [[nodiscard]] bool has_inflight(Op dir) const { return path(dir).inflight != nullptr; }
  [[nodiscard]] const Request* inflight(Op dir) const { return path(dir).inflight.get(); }

  struct Release {
    Cycle cycle;
    std::uint32_t beats;
  };
  [[nodiscard]] const std::vector<Release>& releases() const { return releases_; }
  [[nodiscard]] Cycle period_origin() const { return period_origin_; }
  [[nodiscard]] std::uint64_t tru_stall_cycles() const { return tru_stall_cycles_; }
  [[nodiscard]] std::uint64_t wb_stall_cycles() const { return wb_stall_cycles_; }
  [[nodiscard]] std::uint64_t w_path_stall_cycles() const { return w_path_stall_cycles_; }
  void count_w_path_stall() { ++w_path_stall_cycles_; }
  [[nodiscard]] const WriteBuffer& write_buffer() const { return wb_; }

 private:
  struct Path {
    Transaction* txn = nullptr;
    std::vector<Transaction> frags;
    std::size_t next_frag = 0;
    std::uint32_t frag_released = 0;  ///< beats of frags[next_frag] already released
    std::uint32_t txn_released = 0;   ///< beats of txn already released
    std::unique_ptr<Request> inflight;
  };
  struct WriteData {
    Transaction* txn = nullptr;
    std::vector<std::uint32_t> frag_beats;
    Cycle start = 0;
    Cycle interval = 1;
    std::uint32_t landed = 0;
    Cycle next_offer = 0;
  };

  Path& path(Op dir) { return paths_[dir == Op::Read ? 0 : 1]; }
  [[nodiscard]] const Path& path(Op dir) const { return paths_[dir == Op::Read ? 0 : 1]; }
  [[nodiscard]] bool ready_to_release(Op dir) const;
  Request* release_one(Op dir, Cycle now, std::uint32_t beats);
  [[nodiscard]] const WriteData* data_for(TxnId id) const;

  InitiatorId id_;
  TsuConfig cfg_;
  TruState tru_;
  TruState tru_write_;
  Cycle period_origin_ = 0;
  WriteBuffer wb_;
  std::array<Path, 2> paths_;
  std::deque<WriteData> wdata_;
  Cycle data_free_at_ = 0;
  Cycle data_resume_at_ = 0;  ///< earliest next landing after the last buffered transaction
  std::vector<Release> releases_;
  std::uint64_t tru_stall_cycles_ = 0;
  std::uint64_t wb_stall_cycles_ = 0;
  std::uint64_t w_path_stall_cycles_ = 0;
};

}  // namespace mcsim
