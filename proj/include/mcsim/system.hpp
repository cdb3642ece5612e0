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
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "mcsim/amr.hpp"
#include "mcsim/dcspm.hpp"
#include "mcsim/dpllc.hpp"
#include "mcsim/kernel.hpp"
#include "mcsim/transport.hpp"
#include "mcsim/tsu.hpp"
#include "mcsim/workloads.hpp"

namespace mcsim {

struct SocConfig {
  std::uint32_t beat_bytes = 8;
  Addr hyperram_base = 0x8000'0000;
  std::uint64_t hyperram_bytes = std::uint64_t{256} << 20;
  LlcConfig llc;
  HyperRamConfig hyperram;
  SpmConfig spm;
  amr::AmrConfig amr;
  std::vector<amr::FaultEvent> faults;  ///< applied to AMR-driven compute phases
};

/// Register reprogramming applied at a fixed cycle.
struct TimedAction {
  enum class Kind : std::uint8_t { TsuReconfig, LlcFlush, LlcReprogram };
  Kind kind = Kind::LlcFlush;
  Cycle cycle = 0;
  InitiatorId initiator = 0;
  TsuConfig tsu;
  PartId part = 0;
  PartitionTable table;
};

struct SimEvent {
  Cycle cycle;
  std::string component;
  std::string kind;
  nlohmann::ordered_json fields;
};

struct InitiatorStats {
  std::uint64_t beats_granted = 0;
  std::uint64_t requests_released = 0;
  std::uint64_t tru_stall_cycles = 0;
  std::uint64_t wb_stall_cycles = 0;
  std::uint64_t w_path_stall_cycles = 0;
};

struct BoundStats {
  std::uint64_t checked = 0;
  std::uint64_t violations = 0;
  Cycle max_latency = 0;
  Cycle max_bound = 0;
  std::int64_t min_slack = 0;  ///< smallest bound - latency seen (negative on violation)
};

struct AmrStats {
  std::uint64_t compute_phases = 0;
  std::uint64_t faults_injected = 0;
  std::uint64_t faults_effective = 0;
  std::uint64_t detections = 0;
  std::uint64_t recoveries = 0;
  std::uint64_t masked = 0;
  std::uint64_t undetected = 0;
  std::uint64_t unrecoverable = 0;
  std::uint64_t cluster_restarts = 0;
  std::uint64_t output_mismatches = 0;
  Cycle recovery_cycles = 0;
};

struct RunResult {
  Cycle cycles = 0;
  bool timeout = false;
  std::vector<TaskSpec> specs;
  std::vector<TaskStats> tasks;
  std::vector<InitiatorStats> initiators;
  std::vector<std::uint64_t> task_llc_hits;
  std::vector<std::uint64_t> task_llc_misses;
  std::map<PartId, LlcCounters> llc;
  std::vector<std::uint64_t> spm_bank_conflicts;
  std::uint64_t spm_port_stalls = 0;
  std::uint64_t hyperram_accesses = 0;
  std::uint64_t reprogram_violations = 0;
  std::uint64_t decode_errors = 0;
  BoundStats bounds;
  AmrStats amr;
  std::uint64_t events_dispatched = 0;
  std::vector<SimEvent> events;
};

/// One SoC instance: initiators with their TSUs, the crossbar, the DPLLC in
/// front of HyperRAM and the DCSPM. Runs as a cycle-stepped tick on the
/// event kernel; ticks are skipped while nothing can change.
class Soc {
 public:
  Soc(SocConfig cfg, std::vector<TaskSpec> tasks, std::vector<TsuConfig> tsu,
      std::vector<TimedAction> actions = {});
  ~Soc();
  Soc(const Soc&) = delete;
  Soc& operator=(const Soc&) = delete;

  /// Runs until every non-daemon task finished or `run_limit` cycles passed.
  RunResult run(Cycle run_limit);

  [[nodiscard]] const Llc& llc() const { return llc_; }
  [[nodiscard]] const Dcspm& spm() const { return spm_; }
  [[nodiscard]] const RouteTable& routes() const { return routes_; }
  [[nodiscard]] const Kernel& kernel() const { return kernel_; }

  /// Worst-case downstream service of a request from `who` on `route`.
  [[nodiscard]] ServiceModel service_model(const Route& route, InitiatorId who, Op op) const;

 private:
  struct PendingBound {
    IssueSnapshot snap;
    TsuConfig cfg;
  };

  void tick();
  void schedule_tick(Cycle at);
  void apply(const TimedAction& a);
  void issue_phase(Cycle now);
  void release_phase(Cycle now);
  void transfer_phase(Cycle now);
  void move_beat(Channel& ch, Request* req, Cycle now);
  void check_bound(const Transaction& txn);
  bool all_done() const;
  Channel& channel(const Route& r, Op op);
  Cycle amr_compute(std::uint32_t tile, Cycle start, std::uint64_t units);
  void event(Cycle cycle, std::string component, std::string kind, nlohmann::ordered_json fields = {});
  [[nodiscard]] std::uint32_t max_request_beats(InitiatorId who, Op op) const;

  SocConfig cfg_;
  std::vector<TaskSpec> specs_;
  std::vector<TsuConfig> tsu_cfg_;
  std::vector<TimedAction> actions_;
  Kernel kernel_;
  RouteTable routes_;
  Llc llc_;
  Dcspm spm_;
  std::vector<std::unique_ptr<Task>> tasks_;
  std::vector<std::unique_ptr<Shaper>> shapers_;
  std::vector<std::array<Channel, 2>> llc_channels_;
  std::vector<std::array<Channel, 2>> spm_channels_;
  std::unordered_map<const Request*, std::vector<Cycle>> line_ready_;
  /// Lines already looked up for each transaction, by line index.
  std::unordered_map<const Transaction*, std::map<Addr, Cycle>> txn_lines_;
  std::unordered_map<TxnId, PendingBound> pending_bounds_;
  std::vector<InitiatorStats> init_stats_;
  std::vector<bool> finish_reported_;
  Cycle next_tick_ = kNever;
  bool activity_ = false;
  std::size_t fault_cursor_ = 0;
  std::vector<amr::FaultEvent> faults_sorted_;
  RunResult result_;
};

}  // namespace mcsim
