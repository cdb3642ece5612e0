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
#include <functional>
#include <queue>
#include <vector>

#include "mcsim/types.hpp"

namespace mcsim {

using ComponentId = std::uint32_t;

struct Event {
  Cycle fire_cycle = 0;
  std::uint64_t seq = 0;
  ComponentId target = 0;
  std::function<void()> payload;
};

struct SimClock {
  Cycle now = 0;
};

/// One dispatched event, as recorded in the kernel's dispatch trace.
struct DispatchRecord {
  Cycle cycle;
  std::uint64_t seq;
  ComponentId target;

  friend bool operator==(const DispatchRecord&, const DispatchRecord&) = default;
};

/// Single-threaded discrete-event engine. Events fire in (fire_cycle, seq)
/// order; seq is assigned at schedule time so equal-cycle events dispatch in
/// insertion order.
class Kernel {
 public:
  explicit Kernel(bool record_trace = false) : record_trace_(record_trace) {}

  /// Queues `payload` to run at `fire_cycle`. Throws ConfigError if
  /// `fire_cycle` is in the past.
  std::uint64_t schedule(Cycle fire_cycle, ComponentId target, std::function<void()> payload);

  /// Dispatches every event with fire_cycle <= limit (or until stop() is
  /// requested). Returns the clock after the last dispatch.
  SimClock run_until(Cycle limit);

  /// Ends the current run_until() after the event being dispatched.
  void stop() { stop_requested_ = true; }

  [[nodiscard]] Cycle now() const { return clock_.now; }
  [[nodiscard]] bool empty() const { return queue_.empty(); }
  [[nodiscard]] std::size_t pending() const { return queue_.size(); }
  [[nodiscard]] std::uint64_t dispatched() const { return dispatched_; }
  [[nodiscard]] const std::vector<DispatchRecord>& trace() const { return trace_; }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.fire_cycle != b.fire_cycle) return a.fire_cycle > b.fire_cycle;
      return a.seq > b.seq;
    }
  };

  SimClock clock_;
  std::uint64_t next_seq_ = 0;
  std::uint64_t dispatched_ = 0;
  bool stop_requested_ = false;
  bool record_trace_;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::vector<DispatchRecord> trace_;
};

}  // namespace mcsim
