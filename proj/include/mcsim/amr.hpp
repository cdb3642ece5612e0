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
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mcsim/types.hpp"

namespace mcsim::amr {

inline constexpr std::uint32_t kNumCores = 12;

enum class Mode : std::uint8_t { Indip, Dlm, Tlm };

const char* to_string(Mode m);
Mode mode_from_string(const std::string& s);

/// Cores per redundancy group and number of groups (= active main cores).
constexpr std::uint32_t group_size(Mode m) { return m == Mode::Indip ? 1 : m == Mode::Dlm ? 2 : 3; }
constexpr std::uint32_t active_mains(Mode m) { return kNumCores / group_size(m); }

enum class RecoveryKind : std::uint8_t { Hfr, Software };

/// Cost model for recovering a faulty core in software: trap, store the
/// reference core's state to memory, reload it into the faulty core.
struct SoftwareRecovery {
  Cycle trap_cycles = 40;
  std::uint32_t state_words = 64;
  Cycle mem_access_cycles = 3;

  [[nodiscard]] Cycle cycles() const { return trap_cycles + 2 * Cycle{state_words} * mem_access_cycles; }
};

struct AmrConfig {
  Mode mode = Mode::Indip;
  Cycle recovery_cycles = 24;
  std::map<std::pair<Mode, Mode>, Cycle> reconfig_cycles = default_reconfig_table();
  std::uint32_t checkpoint_period = 1;  ///< commits between checkpoints
  Cycle cycles_per_unit = 1;
  RecoveryKind recovery = RecoveryKind::Hfr;
  SoftwareRecovery software;
  bool ecc_checkpoints = true;
  Cycle restart_cycles = 20000;  ///< cluster reboot after an unusable checkpoint

  static std::map<std::pair<Mode, Mode>, Cycle> default_reconfig_table();
};

inline constexpr Cycle kMinReconfigCycles = 82;
inline constexpr Cycle kMaxReconfigCycles = 183;

void validate(const AmrConfig& cfg);

[[nodiscard]] Cycle reconfig_cost(const AmrConfig& cfg, Mode from, Mode to);

struct ConfigureResult {
  Cycle accepted_at;  ///< request retried until the cluster left recovery
  Cycle resume;
};

/// Mode switch requested at `cycle`; `recovering_until` is when any ongoing
/// recovery ends (switches are rejected while one is in progress).
[[nodiscard]] ConfigureResult amr_configure(const AmrConfig& cfg, Mode from, Mode to, Cycle cycle,
                                            Cycle recovering_until = 0);

// ---------------------------------------------------------------------------
// Checker / voter

struct Committed {
  std::uint64_t value;
  std::vector<std::uint32_t> flagged;  ///< group positions outvoted (TLM)
};
struct FaultDetected {
  std::vector<std::uint32_t> cores;  ///< group positions that must restore
};
struct Unrecoverable {};

using CommitOutcome = std::variant<Committed, FaultDetected, Unrecoverable>;

/// outputs[i] is the commit value of the group's i-th core (main first).
[[nodiscard]] CommitOutcome group_commit(std::span<const std::uint64_t> outputs, Mode mode);

// ---------------------------------------------------------------------------
// Recovery FSM

enum class HfrState : std::uint8_t { Normal, Detected, Restore, Resync, Resume };

const char* to_string(HfrState s);

struct HfrStep {
  HfrState state;
  Cycle enter;
};

/// State entry times of one recovery starting at `cycle`. The last step is
/// the return to Normal at exactly cycle + recovery_cycles.
[[nodiscard]] std::vector<HfrStep> hfr_timeline(Cycle recovery_cycles, Cycle cycle);

/// Resume cycle of a recovery detected at `cycle`.
[[nodiscard]] Cycle hfr_recover(const AmrConfig& cfg, Cycle cycle);

enum class Role : std::uint8_t { Main, Shadow };

struct CoreState {
  std::uint32_t core_id = 0;
  Role role = Role::Main;
  std::uint64_t arch_state = 0;
  std::uint64_t checkpoint = 0;
  HfrState fsm = HfrState::Normal;
  std::uint64_t work_done = 0;
};

/// Core ids of group `g` in `mode`, main core first.
[[nodiscard]] std::vector<std::uint32_t> group_cores(Mode mode, std::uint32_t g);

// ---------------------------------------------------------------------------
// Commit-stream execution

enum class FaultTarget : std::uint8_t { CommitValue, Checkpoint };

struct FaultEvent {
  std::uint32_t core_id = 0;
  Cycle cycle = 0;
  std::uint64_t mask = 1;  ///< XORed into the corrupted value
  FaultTarget target = FaultTarget::CommitValue;
};

struct AmrEvent {
  Cycle cycle;
  std::string kind;
  std::uint32_t group;
  std::uint32_t core;
  Cycle cost;
};

struct AmrRunResult {
  Cycle cycles = 0;
  std::vector<std::uint64_t> output;  ///< committed value per work unit
  std::uint64_t faults_injected = 0;
  std::uint64_t faults_effective = 0;  ///< faults that altered a commit value
  std::uint64_t detections = 0;
  std::uint64_t recoveries = 0;
  std::uint64_t masked = 0;
  std::uint64_t undetected = 0;
  std::uint64_t unrecoverable = 0;
  std::uint64_t cluster_restarts = 0;
  std::uint64_t reexecuted_commits = 0;
  std::uint64_t reconfigurations = 0;
  Cycle recovery_cycles_total = 0;
  Cycle reconfig_cycles_total = 0;
  std::vector<AmrEvent> events;
};

/// Value a fault-free core commits for work unit `unit`.
[[nodiscard]] std::uint64_t unit_value(std::uint64_t unit);

/// Compute cycles for `work_units` spread over the mode's main cores.
[[nodiscard]] Cycle compute_cycles(const AmrConfig& cfg, Mode mode, std::uint64_t work_units);

/// Runs `work_units` in `mode` starting at `start`, applying `faults`.
[[nodiscard]] AmrRunResult run_workload(const AmrConfig& cfg, std::uint64_t work_units, Mode mode,
                                        std::span<const FaultEvent> faults, Cycle start = 0);

struct Phase {
  Mode mode;
  std::uint64_t work_units;
};

/// Runs phases back to back, paying the mode-switch cost between them.
[[nodiscard]] AmrRunResult run_phases(const AmrConfig& cfg, std::span<const Phase> phases,
                                      std::span<const FaultEvent> faults);

}  // namespace mcsim::amr
