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

#include "mcsim/kernel.hpp"

#include <string>
#include <utility>

namespace mcsim {

std::uint64_t Kernel::schedule(Cycle fire_cycle, ComponentId target,
                               std::function<void()> payload) {
  if (fire_cycle < clock_.now) {
    throw ConfigError("event scheduled at cycle " + std::to_string(fire_cycle) +
                      " from cycle " + std::to_string(clock_.now));
  }
  const std::uint64_t seq = next_seq_++;
  queue_.push(Event{fire_cycle, seq, target, std::move(payload)});
  return seq;
}

SimClock Kernel::run_until(Cycle limit) {
  stop_requested_ = false;
  while (!queue_.empty() && !stop_requested_) {
    if (queue_.top().fire_cycle > limit) break;
    // top() is const; the element is popped right after the move.
    Event ev = std::move(const_cast<Event&>(queue_.top()));
    queue_.pop();
    clock_.now = ev.fire_cycle;
    if (record_trace_) trace_.push_back({ev.fire_cycle, ev.seq, ev.target});
    ++dispatched_;
    if (ev.payload) ev.payload();
  }
  return clock_;
}

}  // namespace mcsim
