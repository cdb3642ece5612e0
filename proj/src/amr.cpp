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

#include "mcsim/amr.hpp"

#include <algorithm>
#include <deque>

namespace mcsim::amr {

const char* to_string(Mode m) {
  switch (m) {
    case Mode::Indip: return "INDIP";
    case Mode::Dlm: return "DLM";
    case Mode::Tlm: return "TLM";
  }
  return "?";
}

Mode mode_from_string(const std::string& s) {
  if (s == "INDIP" || s == "indip") return Mode::Indip;
  if (s == "DLM" || s == "dlm") return Mode::Dlm;
  if (s == "TLM" || s == "tlm") return Mode::Tlm;
  throw ConfigError("amr: unknown mode '" + s + "'");
}

const char* to_string(HfrState s) {
  switch (s) {
    case HfrState::Normal: return "Normal";
    case HfrState::Detected: return "Detected";
    case HfrState::Restore: return "Restore";
    case HfrState::Resync: return "Resync";
    case HfrState::Resume: return "Resume";
  }
  return "?";
}

std::map<std::pair<Mode, Mode>, Cycle> AmrConfig::default_reconfig_table() {
  std::map<std::pair<Mode, Mode>, Cycle> t;
  auto both = [&](Mode a, Mode b, Cycle c) {
    t[{a, b}] = c;
    t[{b, a}] = c;
  };
  both(Mode::Indip, Mode::Dlm, 82);
  both(Mode::Indip, Mode::Tlm, 183);
  both(Mode::Dlm, Mode::Tlm, 131);
  return t;
}

void validate(const AmrConfig& cfg) {
  if (cfg.recovery_cycles < 1) throw ConfigError("amr: recovery_cycles must be >= 1");
  if (cfg.checkpoint_period < 1) throw ConfigError("amr: checkpoint_period must be >= 1");
  if (cfg.cycles_per_unit < 1) throw ConfigError("amr: cycles_per_unit must be >= 1");
  for (Mode a : {Mode::Indip, Mode::Dlm, Mode::Tlm}) {
    for (Mode b : {Mode::Indip, Mode::Dlm, Mode::Tlm}) {
      if (a == b) continue;
      const auto it = cfg.reconfig_cycles.find({a, b});
      if (it == cfg.reconfig_cycles.end()) {
        throw ConfigError(std::string("amr: missing reconfiguration cost ") + to_string(a) + "->" + to_string(b));
      }
      if (it->second < kMinReconfigCycles || it->second > kMaxReconfigCycles) {
        throw ConfigError(std::string("amr: reconfiguration cost ") + to_string(a) + "->" + to_string(b) +
                          " outside [82, 183]");
      }
    }
  }
}

Cycle reconfig_cost(const AmrConfig& cfg, Mode from, Mode to) {
  if (from == to) return 0;
  return cfg.reconfig_cycles.at({from, to});
}

ConfigureResult amr_configure(const AmrConfig& cfg, Mode from, Mode to, Cycle cycle, Cycle recovering_until) {
  const Cycle accepted = std::max(cycle, recovering_until);
  return {accepted, accepted + reconfig_cost(cfg, from, to)};
}

CommitOutcome group_commit(std::span<const std::uint64_t> outputs, Mode mode) {
  if (outputs.size() != group_size(mode)) throw ConfigError("amr: commit with wrong group size");
  switch (mode) {
    case Mode::Indip:
      return Committed{outputs[0], {}};
    case Mode::Dlm:
      if (outputs[0] == outputs[1]) return Committed{outputs[0], {}};
      return FaultDetected{{0, 1}};
    case Mode::Tlm: {
      const auto a = outputs[0], b = outputs[1], c = outputs[2];
      if (a == b && b == c) return Committed{a, {}};
      if (a == b) return Committed{a, {2}};
      if (a == c) return Committed{a, {1}};
      if (b == c) return Committed{b, {0}};
      return Unrecoverable{};
    }
  }
  return Unrecoverable{};
}

std::vector<HfrStep> hfr_timeline(Cycle recovery_cycles, Cycle cycle) {
  // Detected and Resume take one cycle each; Restore and Resync split the rest.
  const Cycle edges = std::min<Cycle>(recovery_cycles, 2);
  const Cycle body = recovery_cycles - edges;
  const Cycle restore = (body + 1) / 2;
  const Cycle detected = edges >= 1 ? 1 : 0;
  std::vector<HfrStep> steps;
  Cycle t = cycle;
  steps.push_back({HfrState::Detected, t});
  t += detected;
  steps.push_back({HfrState::Restore, t});
  t += restore;
  steps.push_back({HfrState::Resync, t});
  t += body - restore;
  steps.push_back({HfrState::Resume, t});
  t += edges - detected;
  steps.push_back({HfrState::Normal, t});
  return steps;
}

Cycle hfr_recover(const AmrConfig& cfg, Cycle cycle) { return hfr_timeline(cfg.recovery_cycles, cycle).back().enter; }

std::vector<std::uint32_t> group_cores(Mode mode, std::uint32_t g) {
  const std::uint32_t groups = active_mains(mode);
  if (g >= groups) throw ConfigError("amr: group index out of range");
  std::vector<std::uint32_t> cores;
  for (std::uint32_t k = 0; k < group_size(mode); ++k) cores.push_back(g + k * groups);
  return cores;
}

std::uint64_t unit_value(std::uint64_t unit) {
  // splitmix64
  std::uint64_t z = unit + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Cycle compute_cycles(const AmrConfig& cfg, Mode mode, std::uint64_t work_units) {
  return ceil_div(work_units, active_mains(mode)) * cfg.cycles_per_unit;
}

namespace {

Cycle recovery_cost(const AmrConfig& cfg) {
  return cfg.recovery == RecoveryKind::Hfr ? cfg.recovery_cycles : cfg.software.cycles();
}

}  // namespace

AmrRunResult run_workload(const AmrConfig& cfg, std::uint64_t work_units, Mode mode,
                          std::span<const FaultEvent> faults, Cycle start) {
  validate(cfg);
  AmrRunResult res;
  res.output.assign(work_units, 0);
  res.faults_injected = faults.size();

  std::vector<std::deque<FaultEvent>> pending(kNumCores);
  {
    std::vector<FaultEvent> sorted(faults.begin(), faults.end());
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const FaultEvent& a, const FaultEvent& b) { return a.cycle < b.cycle; });
    for (const auto& f : sorted) {
      if (f.core_id >= kNumCores) throw ConfigError("amr: fault targets nonexistent core");
      pending[f.core_id].push_back(f);
    }
  }

  const std::uint32_t groups = active_mains(mode);
  const Cycle cost = recovery_cost(cfg);
  Cycle end = start;

  for (std::uint32_t g = 0; g < groups; ++g) {
    const auto cores = group_cores(mode, g);
    std::vector<std::uint64_t> units;
    for (std::uint64_t u = g; u < work_units; u += groups) units.push_back(u);

    Cycle t = start;
    std::size_t i = 0;
    std::uint64_t since_checkpoint = 0;
    bool checkpoint_bad = false;
    std::vector<std::uint64_t> outputs(cores.size());

    while (i < units.size()) {
      const std::uint64_t u = units[i];
      t += cfg.cycles_per_unit;
      for (std::size_t k = 0; k < cores.size(); ++k) {
        outputs[k] = unit_value(u);
        auto& q = pending[cores[k]];
        while (!q.empty() && q.front().cycle <= t) {
          const FaultEvent f = q.front();
          q.pop_front();
          if (f.target == FaultTarget::Checkpoint) {
            if (!cfg.ecc_checkpoints) checkpoint_bad = true;
            continue;
          }
          outputs[k] ^= f.mask;
          ++res.faults_effective;
          break;  // one corruption per commit
        }
      }

      const CommitOutcome outcome = group_commit(outputs, mode);
      if (const auto* c = std::get_if<Committed>(&outcome)) {
        res.output[u] = c->value;
        if (mode == Mode::Indip && c->value != unit_value(u)) ++res.undetected;
        if (!c->flagged.empty()) {
          ++res.masked;
          ++res.recoveries;
          res.recovery_cycles_total += cost;
          res.events.push_back({t, "mask", g, cores[c->flagged.front()], 0});
          res.events.push_back({t, "resync", g, cores[c->flagged.front()], cost});
          t += cost;
        }
        ++i;
        if (++since_checkpoint == cfg.checkpoint_period) since_checkpoint = 0;
      } else if (std::holds_alternative<FaultDetected>(outcome)) {
        ++res.detections;
        res.events.push_back({t, "detect", g, cores.front(), 0});
        if (checkpoint_bad) {
          ++res.cluster_restarts;
          res.events.push_back({t, "cluster-restart", g, cores.front(), cfg.restart_cycles});
          t += cfg.restart_cycles;
          res.reexecuted_commits += i + 1;
          i = 0;
          since_checkpoint = 0;
          checkpoint_bad = false;
          continue;
        }
        ++res.recoveries;
        res.recovery_cycles_total += cost;
        res.events.push_back({t, "recover", g, cores.front(), cost});
        t += cost;
        res.reexecuted_commits += since_checkpoint + 1;
        i -= since_checkpoint;
        since_checkpoint = 0;
      } else {
        ++res.unrecoverable;
        res.events.push_back({t, "halt", g, cores.front(), 0});
        break;
      }
    }
    end = std::max(end, t);
  }
  res.cycles = end - start;
  std::stable_sort(res.events.begin(), res.events.end(),
                   [](const AmrEvent& a, const AmrEvent& b) { return a.cycle < b.cycle; });
  return res;
}

AmrRunResult run_phases(const AmrConfig& cfg, std::span<const Phase> phases, std::span<const FaultEvent> faults) {
  AmrRunResult total;
  total.faults_injected = faults.size();
  std::vector<FaultEvent> sorted(faults.begin(), faults.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const FaultEvent& a, const FaultEvent& b) { return a.cycle < b.cycle; });
  std::size_t cursor = 0;
  Mode current = cfg.mode;
  Cycle t = 0;
  for (const auto& ph : phases) {
    if (ph.mode != current) {
      const auto r = amr_configure(cfg, current, ph.mode, t);
      total.events.push_back({t, std::string("reconfig:") + to_string(current) + "->" + to_string(ph.mode), 0, 0,
                              r.resume - t});
      total.reconfig_cycles_total += r.resume - t;
      ++total.reconfigurations;
      t = r.resume;
      current = ph.mode;
    }
    // Faults that land while the cluster is switching modes hit no committed state.
    while (cursor < sorted.size() && sorted[cursor].cycle < t) ++cursor;
    const Cycle nominal = compute_cycles(cfg, ph.mode, ph.work_units);
    std::size_t last = cursor;
    while (last < sorted.size() && sorted[last].cycle < t + nominal) ++last;
    const std::span<const FaultEvent> slice(sorted.data() + cursor, last - cursor);
    cursor = last;
    auto r = run_workload(cfg, ph.work_units, ph.mode, slice, t);
    total.output.insert(total.output.end(), r.output.begin(), r.output.end());
    total.faults_effective += r.faults_effective;
    total.detections += r.detections;
    total.recoveries += r.recoveries;
    total.masked += r.masked;
    total.undetected += r.undetected;
    total.unrecoverable += r.unrecoverable;
    total.cluster_restarts += r.cluster_restarts;
    total.reexecuted_commits += r.reexecuted_commits;
    total.recovery_cycles_total += r.recovery_cycles_total;
    total.events.insert(total.events.end(), r.events.begin(), r.events.end());
    t += r.cycles;
  }
  total.cycles = t;
  return total;
}

}  // namespace mcsim::amr
