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

#include "mcsim/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace mcsim {

namespace {

class Rows {
 public:
  Rows(std::vector<MetricRow>& out, std::string scenario, std::string variant)
      : out_(out), scenario_(std::move(scenario)), variant_(std::move(variant)) {}

  void u(const std::string& subject, const char* metric, std::uint64_t v, const char* unit) {
    out_.push_back({scenario_, variant_, subject, metric, std::to_string(v), unit});
  }
  void i(const std::string& subject, const char* metric, std::int64_t v, const char* unit) {
    out_.push_back({scenario_, variant_, subject, metric, std::to_string(v), unit});
  }
  void d(const std::string& subject, const char* metric, double v, const char* unit) {
    out_.push_back({scenario_, variant_, subject, metric, format_fixed(v), unit});
  }

 private:
  std::vector<MetricRow>& out_;
  std::string scenario_;
  std::string variant_;
};

}  // namespace

std::string format_fixed(double v, int decimals) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::fixed << std::setprecision(decimals) << v;
  return os.str();
}

const std::vector<MetricDef>& metric_catalog() {
  static const std::vector<MetricDef> kCatalog = {
      {"<task>", "completion_cycles", "cycles", "start to last completion (run end if unfinished)"},
      {"<task>", "finished", "flag", "1 if the task completed within run_limit"},
      {"<task>", "transactions", "count", "bursts completed"},
      {"<task>", "beats", "beats", "beats moved"},
      {"<task>", "phases", "count", "passes, tiles or DMA iterations completed"},
      {"<task>", "decode_errors", "count", "bursts outside every mapped window"},
      {"<task>", "latency", "cycles", "mean per-access latency over the steady-state window"},
      {"<task>", "latency_min", "cycles", "minimum per-access latency over the steady-state window"},
      {"<task>", "latency_max", "cycles", "maximum per-access latency over the steady-state window"},
      {"<task>", "jitter", "cycles", "latency_max - latency_min"},
      {"<task>", "steady_cycles", "cycles", "duration of the steady-state window"},
      {"<task>", "llc_hits", "count", "DPLLC line hits caused by the task"},
      {"<task>", "llc_miss", "count", "DPLLC line misses caused by the task"},
      {"<task>", "slowdown", "ratio", "completion_cycles / isolated completion_cycles"},
      {"<task>", "latency_ratio", "ratio", "latency / isolated latency"},
      {"<task>", "miss_ratio", "ratio", "llc_miss / isolated llc_miss"},
      {"tsu.<task>", "beats_granted", "beats", "beats released downstream"},
      {"tsu.<task>", "requests_released", "count", "downstream requests after splitting and budget cuts"},
      {"tsu.<task>", "tru_stall_cycles", "cycles", "cycles a ready request waited for budget"},
      {"tsu.<task>", "wb_stall_cycles", "cycles", "cycles write data waited for write-buffer space"},
      {"tsu.<task>", "w_path_stall_cycles", "cycles", "cycles a granted write burst waited for data"},
      {"tsu.bound", "checked", "count", "regulated transactions checked against the latency bound"},
      {"tsu.bound", "violations", "count", "regulated transactions slower than their bound"},
      {"tsu.bound", "min_slack", "cycles", "smallest bound - latency"},
      {"tsu.bound", "max_latency", "cycles", "largest regulated latency"},
      {"tsu.bound", "max_bound", "cycles", "largest bound computed"},
      {"llc.part<id>", "hits", "count", "line hits in the partition"},
      {"llc.part<id>", "misses", "count", "line misses in the partition"},
      {"llc.part<id>", "evictions", "count", "valid lines replaced"},
      {"llc.part<id>", "flushes", "count", "lines invalidated by flushes"},
      {"llc.part<id>", "writebacks", "count", "dirty lines written to HyperRAM"},
      {"llc", "hyperram_accesses", "count", "HyperRAM line transfers"},
      {"llc", "reprogram_violations", "count", "partition changes applied with resident lines"},
      {"spm.bank<k>", "conflicts", "count", "beats that lost arbitration for the bank"},
      {"spm", "conflicts", "count", "sum of bank conflicts"},
      {"spm", "port_stalls", "count", "beats that lost their port to the other direction"},
      {"amr", "compute_phases", "count", "compute phases run on the AMR cluster model"},
      {"amr", "faults_injected", "count", "faults applied to compute phases"},
      {"amr", "faults_effective", "count", "faults that altered a commit value"},
      {"amr", "detections", "count", "DLM checker mismatches"},
      {"amr", "recoveries", "count", "HFR (or software) recoveries"},
      {"amr", "masked", "count", "TLM commits with an outvoted core"},
      {"amr", "undetected", "count", "INDIP commits with a wrong value"},
      {"amr", "unrecoverable", "count", "TLM three-way disagreements"},
      {"amr", "cluster_restarts", "count", "recoveries escalated to a cluster restart"},
      {"amr", "output_mismatches", "count", "work units whose output differs from the fault-free run"},
      {"amr", "recovery_cycles", "cycles", "cycles spent in recovery"},
      {"amr.phases", "cycles", "cycles", "standalone phase run length"},
      {"amr.phases", "reconfigurations", "count", "mode switches"},
      {"amr.phases", "reconfig_cycles", "cycles", "cycles spent switching modes"},
      {"amr.phases", "recoveries", "count", "recoveries during the phase run"},
      {"amr.phases", "recovery_cycles", "cycles", "cycles spent in recovery"},
      {"amr.phases", "reexecuted_commits", "count", "commits executed again after a rollback"},
      {"amr.phases", "detections", "count", "DLM checker mismatches"},
      {"amr.phases", "masked", "count", "TLM commits with an outvoted core"},
      {"amr.phases", "undetected", "count", "INDIP commits with a wrong value"},
      {"amr.phases", "unrecoverable", "count", "TLM three-way disagreements"},
      {"amr.phases", "cluster_restarts", "count", "recoveries escalated to a cluster restart"},
      {"amr.phases", "output_mismatches", "count", "work units differing from the fault-free run"},
      {"amr.calibration", "hfr_recovery_cycles", "cycles", "configured HFR recovery latency"},
      {"amr.calibration", "software_recovery_cycles", "cycles", "software recovery baseline (calibration-dependent)"},
      {"amr.calibration", "software_vs_hfr", "ratio", "software / HFR recovery latency (calibration-dependent)"},
      {"sim", "cycles", "cycles", "simulated cycles"},
      {"sim", "timeout", "flag", "1 if run_limit was reached first"},
      {"sim", "decode_errors", "count", "bursts outside every mapped window"},
      {"sim", "events_dispatched", "count", "kernel events dispatched"},
  };
  return kCatalog;
}

LatencyStats steady_latency(const TaskStats& stats) {
  LatencyStats s;
  if (stats.accesses.empty()) return s;
  std::uint32_t phases = 0;
  for (const auto& a : stats.accesses) phases = std::max(phases, a.phase + 1);
  const bool trim = phases >= 3;
  Cycle first = kNever;
  Cycle last = 0;
  double sum = 0.0;
  for (const auto& a : stats.accesses) {
    if (trim && (a.phase == 0 || a.phase + 1 == phases)) continue;
    const Cycle lat = a.complete - a.issue;
    if (s.samples == 0) {
      s.min = lat;
      s.max = lat;
    }
    s.min = std::min(s.min, lat);
    s.max = std::max(s.max, lat);
    sum += static_cast<double>(lat);
    first = std::min(first, a.issue);
    last = std::max(last, a.complete);
    ++s.samples;
  }
  if (s.samples > 0) {
    s.mean = sum / static_cast<double>(s.samples);
    s.window_cycles = last - first;
  }
  return s;
}

Cycle completion_cycles(const TaskSpec& spec, const TaskStats& stats, Cycle run_end) {
  const Cycle end = stats.finished != kNever ? stats.finished : run_end;
  return end > spec.start ? end - spec.start : 0;
}

std::vector<MetricRow> collect_metrics(const Experiment& ex) {
  std::vector<MetricRow> out;
  const VariantReport* iso = ex.find("isolated");

  for (const auto& v : ex.variants) {
    Rows rows(out, ex.scenario, v.name);
    const RunResult& r = v.run;

    for (std::size_t i = 0; i < r.tasks.size(); ++i) {
      const TaskSpec& spec = r.specs[i];
      const TaskStats& st = r.tasks[i];
      const std::string& n = spec.name;
      const LatencyStats lat = steady_latency(st);
      const Cycle completion = completion_cycles(spec, st, r.cycles);
      rows.u(n, "completion_cycles", completion, "cycles");
      rows.u(n, "finished", st.finished != kNever ? 1 : 0, "flag");
      rows.u(n, "transactions", st.transactions, "count");
      rows.u(n, "beats", st.beats, "beats");
      rows.u(n, "phases", st.phases, "count");
      rows.u(n, "decode_errors", st.decode_errors, "count");
      rows.d(n, "latency", lat.mean, "cycles");
      rows.u(n, "latency_min", lat.min, "cycles");
      rows.u(n, "latency_max", lat.max, "cycles");
      rows.u(n, "jitter", lat.jitter(), "cycles");
      rows.u(n, "steady_cycles", lat.window_cycles, "cycles");
      rows.u(n, "llc_hits", r.task_llc_hits[i], "count");
      rows.u(n, "llc_miss", r.task_llc_misses[i], "count");
      if (iso != nullptr && i < iso->run.tasks.size() && iso->run.specs[i].name == n) {
        const TaskStats& is = iso->run.tasks[i];
        const Cycle ic = completion_cycles(iso->run.specs[i], is, iso->run.cycles);
        const LatencyStats il = steady_latency(is);
        if (ic > 0 && st.finished != kNever && is.finished != kNever) {
          rows.d(n, "slowdown", static_cast<double>(completion) / static_cast<double>(ic), "ratio");
        }
        if (il.mean > 0.0 && lat.samples > 0) rows.d(n, "latency_ratio", lat.mean / il.mean, "ratio");
        const std::uint64_t im = iso->run.task_llc_misses[i];
        if (im > 0) {
          rows.d(n, "miss_ratio", static_cast<double>(r.task_llc_misses[i]) / static_cast<double>(im), "ratio");
        }
      }
    }

    for (std::size_t i = 0; i < r.initiators.size(); ++i) {
      const std::string s = "tsu." + r.specs[i].name;
      const auto& in = r.initiators[i];
      rows.u(s, "beats_granted", in.beats_granted, "beats");
      rows.u(s, "requests_released", in.requests_released, "count");
      rows.u(s, "tru_stall_cycles", in.tru_stall_cycles, "cycles");
      rows.u(s, "wb_stall_cycles", in.wb_stall_cycles, "cycles");
      rows.u(s, "w_path_stall_cycles", in.w_path_stall_cycles, "cycles");
    }
    rows.u("tsu.bound", "checked", r.bounds.checked, "count");
    rows.u("tsu.bound", "violations", r.bounds.violations, "count");
    rows.i("tsu.bound", "min_slack", r.bounds.min_slack, "cycles");
    rows.u("tsu.bound", "max_latency", r.bounds.max_latency, "cycles");
    rows.u("tsu.bound", "max_bound", r.bounds.max_bound, "cycles");

    for (const auto& [id, c] : r.llc) {
      const std::string s = "llc.part" + std::to_string(id);
      rows.u(s, "hits", c.hits, "count");
      rows.u(s, "misses", c.misses, "count");
      rows.u(s, "evictions", c.evictions, "count");
      rows.u(s, "flushes", c.flushes, "count");
      rows.u(s, "writebacks", c.writebacks, "count");
    }
    rows.u("llc", "hyperram_accesses", r.hyperram_accesses, "count");
    rows.u("llc", "reprogram_violations", r.reprogram_violations, "count");

    std::uint64_t total = 0;
    for (std::size_t b = 0; b < r.spm_bank_conflicts.size(); ++b) {
      rows.u("spm.bank" + std::to_string(b), "conflicts", r.spm_bank_conflicts[b], "count");
      total += r.spm_bank_conflicts[b];
    }
    rows.u("spm", "conflicts", total, "count");
    rows.u("spm", "port_stalls", r.spm_port_stalls, "count");

    const auto& a = r.amr;
    rows.u("amr", "compute_phases", a.compute_phases, "count");
    rows.u("amr", "faults_injected", a.faults_injected, "count");
    rows.u("amr", "faults_effective", a.faults_effective, "count");
    rows.u("amr", "detections", a.detections, "count");
    rows.u("amr", "recoveries", a.recoveries, "count");
    rows.u("amr", "masked", a.masked, "count");
    rows.u("amr", "undetected", a.undetected, "count");
    rows.u("amr", "unrecoverable", a.unrecoverable, "count");
    rows.u("amr", "cluster_restarts", a.cluster_restarts, "count");
    rows.u("amr", "output_mismatches", a.output_mismatches, "count");
    rows.u("amr", "recovery_cycles", a.recovery_cycles, "cycles");

    if (v.amr_phases) {
      const auto& p = *v.amr_phases;
      rows.u("amr.phases", "cycles", p.cycles, "cycles");
      rows.u("amr.phases", "reconfigurations", p.reconfigurations, "count");
      rows.u("amr.phases", "reconfig_cycles", p.reconfig_cycles_total, "cycles");
      rows.u("amr.phases", "recoveries", p.recoveries, "count");
      rows.u("amr.phases", "recovery_cycles", p.recovery_cycles_total, "cycles");
      rows.u("amr.phases", "reexecuted_commits", p.reexecuted_commits, "count");
      rows.u("amr.phases", "detections", p.detections, "count");
      rows.u("amr.phases", "masked", p.masked, "count");
      rows.u("amr.phases", "undetected", p.undetected, "count");
      rows.u("amr.phases", "unrecoverable", p.unrecoverable, "count");
      rows.u("amr.phases", "cluster_restarts", p.cluster_restarts, "count");
      rows.u("amr.phases", "output_mismatches", v.amr_phase_mismatches, "count");
    }

    rows.u("amr.calibration", "hfr_recovery_cycles", v.amr_config.recovery_cycles, "cycles");
    rows.u("amr.calibration", "software_recovery_cycles", v.amr_config.software.cycles(), "cycles");
    rows.d("amr.calibration", "software_vs_hfr",
           static_cast<double>(v.amr_config.software.cycles()) / static_cast<double>(v.amr_config.recovery_cycles),
           "ratio");

    rows.u("sim", "cycles", r.cycles, "cycles");
    rows.u("sim", "timeout", r.timeout ? 1 : 0, "flag");
    rows.u("sim", "decode_errors", r.decode_errors, "count");
    rows.u("sim", "events_dispatched", r.events_dispatched, "count");
  }
  return out;
}

std::string format_csv(const std::vector<MetricRow>& rows) {
  std::string s = kCsvHeader;
  s += '\n';
  for (const auto& r : rows) {
    s += r.scenario + ',' + r.variant + ',' + r.subject + ',' + r.metric + ',' + r.value + ',' + r.unit + '\n';
  }
  return s;
}

std::string format_events(const Experiment& ex) {
  std::string s;
  for (const auto& v : ex.variants) {
    for (const auto& e : v.run.events) {
      nlohmann::ordered_json j;
      j["variant"] = v.name;
      j["cycle"] = e.cycle;
      j["component"] = e.component;
      j["kind"] = e.kind;
      j["fields"] = e.fields.is_null() ? nlohmann::ordered_json::object() : e.fields;
      s += j.dump();
      s += '\n';
    }
    if (v.amr_phases) {
      for (const auto& e : v.amr_phases->events) {
        nlohmann::ordered_json j;
        j["variant"] = v.name;
        j["cycle"] = e.cycle;
        j["component"] = "amr.phases";
        j["kind"] = e.kind;
        j["fields"] = {{"group", e.group}, {"core", e.core}, {"cost", e.cost}};
        s += j.dump();
        s += '\n';
      }
    }
  }
  return s;
}

std::string format_summary(const Experiment& ex) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  const VariantReport* iso = ex.find("isolated");
  os << "scenario " << ex.scenario << " (seed " << ex.seed << ")\n\n";
  for (const auto& v : ex.variants) {
    const RunResult& r = v.run;
    os << "== " << v.name << (r.timeout ? "  [TIMEOUT]" : "") << "  (" << r.cycles << " cycles)\n";
    os << "  " << std::left << std::setw(16) << "task" << std::right << std::setw(12) << "completion"
       << std::setw(12) << "latency" << std::setw(9) << "jitter" << std::setw(10) << "llc_miss" << std::setw(11)
       << "slowdown" << std::setw(12) << "lat_ratio" << '\n';
    for (std::size_t i = 0; i < r.tasks.size(); ++i) {
      const auto& spec = r.specs[i];
      const auto lat = steady_latency(r.tasks[i]);
      const Cycle c = completion_cycles(spec, r.tasks[i], r.cycles);
      os << "  " << std::left << std::setw(16) << spec.name << std::right << std::setw(12) << c
         << std::setw(12) << format_fixed(lat.mean, 2) << std::setw(9) << lat.jitter() << std::setw(10)
         << r.task_llc_misses[i];
      std::string slow = "-";
      std::string lr = "-";
      if (iso != nullptr && i < iso->run.tasks.size()) {
        const Cycle ic = completion_cycles(iso->run.specs[i], iso->run.tasks[i], iso->run.cycles);
        const auto il = steady_latency(iso->run.tasks[i]);
        if (ic > 0 && r.tasks[i].finished != kNever && iso->run.tasks[i].finished != kNever) slow = format_fixed(static_cast<double>(c) / static_cast<double>(ic), 2) + "x";
        if (il.mean > 0) lr = format_fixed(lat.mean / il.mean, 2) + "x";
      }
      os << std::setw(11) << slow << std::setw(12) << lr;
      if (r.tasks[i].finished == kNever) os << "  (unfinished)";
      os << '\n';
    }
    if (r.bounds.checked > 0) {
      os << "  tsu bound: " << r.bounds.checked << " regulated transactions, " << r.bounds.violations
         << " violations, min slack " << r.bounds.min_slack << " cycles\n";
    }
    std::uint64_t conflicts = 0;
    for (auto c : r.spm_bank_conflicts) conflicts += c;
    os << "  spm bank conflicts: " << conflicts << "\n";
    if (r.amr.compute_phases > 0) {
      os << "  amr: " << r.amr.faults_effective << " effective faults, " << r.amr.detections << " detected, "
         << r.amr.masked << " masked, " << r.amr.recoveries << " recoveries (" << r.amr.recovery_cycles
         << " cycles), " << r.amr.output_mismatches << " output mismatches\n";
    }
    if (v.amr_phases) {
      const auto& p = *v.amr_phases;
      os << "  amr phases: " << p.cycles << " cycles, " << p.reconfigurations << " mode switches ("
         << p.reconfig_cycles_total << " cycles), " << p.recoveries << " recoveries (" << p.recovery_cycles_total
         << " cycles), " << v.amr_phase_mismatches << " output mismatches\n";
    }
    os << '\n';
  }
  if (!ex.variants.empty()) {
    const auto& cfg = ex.variants.front().amr_config;
    os << "recovery calibration (calibration-dependent): HFR " << cfg.recovery_cycles << " cycles, software "
       << cfg.software.cycles() << " cycles, ratio "
       << format_fixed(static_cast<double>(cfg.software.cycles()) / static_cast<double>(cfg.recovery_cycles), 2)
       << "x\n";
  }
  return os.str();
}

std::filesystem::path emit_report(const Experiment& ex, const std::filesystem::path& out_dir) {
  const std::filesystem::path dir = out_dir / ex.scenario;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  auto write = [&](const char* file, const std::string& content) {
    const auto p = dir / file;
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + p.string());
  };
  write("metrics.csv", format_csv(collect_metrics(ex)));
  write("events.jsonl", format_events(ex));
  write("summary.txt", format_summary(ex));
  return dir;
}

}  // namespace mcsim
