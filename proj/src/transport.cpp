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

#include "mcsim/transport.hpp"

#include <algorithm>
#include <sstream>

namespace mcsim {

void validate(const Transaction& txn) {
  if (txn.beats < 1) throw ConfigError("transaction with zero beats");
  if (!is_pow2(txn.beat_bytes)) throw ConfigError("beat_bytes must be a power of two");
  if (txn.addr % txn.beat_bytes != 0) {
    std::ostringstream os;
    os << "address 0x" << std::hex << txn.addr << " not aligned to " << std::dec << txn.beat_bytes
       << "-byte beats";
    throw ConfigError(os.str());
  }
  if (txn.complete() && !(txn.t_issue <= txn.t_accept && txn.t_accept <= txn.t_complete)) {
    throw ConfigError("transaction timestamps out of order");
  }
}

void RouteTable::add(Addr base, std::uint64_t size, Route route) {
  if (size == 0) throw ConfigError("empty address range in route table");
  for (const auto& e : entries_) {
    const bool disjoint = base + size <= e.base || e.base + e.size <= base;
    if (!disjoint) {
      std::ostringstream os;
      os << "address range 0x" << std::hex << base << "+0x" << size << " overlaps 0x" << e.base
         << "+0x" << e.size;
      throw ConfigError(os.str());
    }
  }
  entries_.push_back({base, size, route});
  std::sort(entries_.begin(), entries_.end(),
            [](const RouteEntry& a, const RouteEntry& b) { return a.base < b.base; });
}

std::optional<Route> RouteTable::route(Addr addr) const {
  for (const auto& e : entries_) {
    if (e.contains(addr)) return e.route;
  }
  return std::nullopt;
}

std::optional<Route> RouteTable::route_range(Addr addr, std::uint64_t bytes) const {
  for (const auto& e : entries_) {
    if (e.contains(addr)) {
      if (bytes == 0 || e.contains(addr + bytes - 1)) return e.route;
      return std::nullopt;
    }
  }
  return std::nullopt;
}

Channel::Channel(std::size_t num_initiators)
    : slots_(num_initiators, nullptr), rr_(num_initiators) {}

void Channel::present(Request* req) {
  auto& slot = slots_.at(req->initiator);
  if (slot != nullptr) throw ConfigError("initiator already has a request on this channel");
  slot = req;
  ++pending_;
}

Request* Channel::holder() {
  if (holder_ == kNone) {
    if (pending_ == 0) return nullptr;
    const auto pick = rr_.pick([this](std::size_t i) { return slots_[i] != nullptr; });
    if (!pick) return nullptr;
    holder_ = *pick;
  }
  return slots_[holder_];
}

Request* Channel::beat_transferred(Cycle cycle) {
  Request* r = slots_.at(holder_);
  if (r->done == 0) r->first_beat = cycle;
  ++r->done;
  if (!r->finished()) return nullptr;
  slots_[holder_] = nullptr;
  --pending_;
  rr_.served(holder_);
  holder_ = kNone;
  return r;
}

}  // namespace mcsim
