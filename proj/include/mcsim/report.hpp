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
#include <filesystem>
#include <string>
#include <vector>

#include "mcsim/scenario.hpp"

namespace mcsim {

inline constexpr const char* kCsvHeader = "scenario,variant,subject,metric,value,unit";

struct MetricRow {
  std::string scenario;
  std::string variant;
  std::string subject;
  std::string metric;
  std::string value;  ///< already formatted
  std::string unit;
};

struct MetricDef {
  const char* subject;  ///< subject pattern, e.g. "<task>" or "llc.part<id>"
  const char* metric;
  const char* unit;
  const char* description;
};

[[nodiscard]] const std::vector<MetricDef>& metric_catalog();

/// Per-access latency statistics over the steady-state window: the first
/// and last pass/tile are dropped when there are at least three.
struct LatencyStats {
  std::uint64_t samples = 0;
  double mean = 0.0;
  Cycle min = 0;
  Cycle max = 0;
  Cycle window_cycles = 0;  ///< first issue to last completion inside the window
  [[nodiscard]] Cycle jitter() const { return max - min; }
};
[[nodiscard]] LatencyStats steady_latency(const TaskStats& stats);

/// Completion time of a task measured from its start cycle.
[[nodiscard]] Cycle completion_cycles(const TaskSpec& spec, const TaskStats& stats, Cycle run_end);

[[nodiscard]] std::vector<MetricRow> collect_metrics(const Experiment& ex);
[[nodiscard]] std::string format_csv(const std::vector<MetricRow>& rows);
[[nodiscard]] std::string format_events(const Experiment& ex);
[[nodiscard]] std::string format_summary(const Experiment& ex);

/// Writes <out_dir>/<scenario>/{metrics.csv, events.jsonl, summary.txt}.
/// Returns the scenario directory. Throws std::runtime_error when it cannot write.
std::filesystem::path emit_report(const Experiment& ex, const std::filesystem::path& out_dir);

/// Fixed-point decimal formatting independent of the global locale.
[[nodiscard]] std::string format_fixed(double v, int decimals = 6);

}  // namespace mcsim
