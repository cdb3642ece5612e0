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
#include <optional>
#include <string>
#include <vector>

#include "mcsim/types.hpp"

namespace mcsim {

/// One AXI-style burst as issued by an initiator.
struct Transaction {
  TxnId txn_id = 0;
  InitiatorId initiator = 0;
  Op op = Op::Read;
  Addr addr = 0;
  std::uint32_t beats = 1;
  std::uint32_t beat_bytes = 8;
  PartId part_id = 0;
  Criticality criticality = Criticality::NonCritical;
  Cycle t_issue = kNever;
  Cycle t_accept = kNever;
  Cycle t_complete = kNever;
  bool decode_error = false;

  [[nodiscard]] bool complete() const { return t_complete != kNever; }
  [[nodiscard]] Addr end() const { return addr + std::uint64_t{beats} * beat_bytes; }
  [[nodiscard]] Addr beat_addr(std::uint32_t i) const { return addr + std::uint64_t{i} * beat_bytes; }
  [[nodiscard]] Cycle latency() const { return t_complete - t_issue; }
};

/// Throws ConfigError when beats/beat_bytes/alignment or timestamp order is broken.
void validate(const Transaction& txn);

enum class EndpointKind : std::uint8_t { Dcspm, Dpllc };

inline const char* to_string(EndpointKind k) { return k == EndpointKind::Dcspm ? "dcspm" : "dpllc"; }

struct Route {
  EndpointKind endpoint;
  std::uint32_t port = 0;

  friend bool operator==(const Route&, const Route&) = default;
};

struct RouteEntry {
  Addr base = 0;
  std::uint64_t size = 0;
  Route route;
  [[nodiscard]] bool contains(Addr a) const { return a >= base && a - base < size; }
};

/// Address-range to endpoint-port map. Ranges must be disjoint.
class RouteTable {
 public:
  /// Throws ConfigError on an empty or overlapping range.
  void add(Addr base, std::uint64_t size, Route route);

  /// nullopt means decode error.
  [[nodiscard]] std::optional<Route> route(Addr addr) const;
  /// True only if the whole byte range [addr, addr+bytes) sits in one entry.
  [[nodiscard]] std::optional<Route> route_range(Addr addr, std::uint64_t bytes) const;
  [[nodiscard]] const std::vector<RouteEntry>& entries() const { return entries_; }

 private:
  std::vector<RouteEntry> entries_;
};

/// Round-robin pointer over a fixed requester set. The pointer moves past a
/// requester only when that requester is actually served.
class RoundRobin {
 public:
  explicit RoundRobin(std::size_t n = 0) : n_(n) {}

  template <class Pred>
  [[nodiscard]] std::optional<std::size_t> pick(Pred&& requesting) const {
    for (std::size_t k = 0; k < n_; ++k) {
      const std::size_t i = (next_ + k) % n_;
      if (requesting(i)) return i;
    }
    return std::nullopt;
  }
  void served(std::size_t who) { next_ = (who + 1) % n_; }
  [[nodiscard]] std::size_t pointer() const { return next_; }
  [[nodiscard]] std::size_t size() const { return n_; }

 private:
  std::size_t n_;
  std::size_t next_ = 0;
};

/// A downstream request: a whole transaction, or one fragment of it after
/// burst splitting / budget cutting.
struct Request {
  Transaction* owner = nullptr;
  TxnId txn_id = 0;
  InitiatorId initiator = 0;
  Op op = Op::Read;
  Addr addr = 0;
  std::uint32_t beats = 1;
  std::uint32_t beat_bytes = 8;
  PartId part_id = 0;
  Route route{EndpointKind::Dpllc, 0};
  bool last_of_txn = true;
  std::uint32_t fragment = 0;         ///< GBS fragment index within the transaction
  std::uint32_t txn_beat_offset = 0;  ///< index of this request's first beat in the transaction
  std::uint32_t done = 0;
  Cycle released = kNever;
  Cycle first_beat = kNever;

  [[nodiscard]] Addr beat_addr(std::uint32_t i) const { return addr + std::uint64_t{i} * beat_bytes; }
  [[nodiscard]] Addr next_beat_addr() const { return beat_addr(done); }
  [[nodiscard]] bool finished() const { return done == beats; }
};

/// One arbitrated path (read or write) into one endpoint port. A granted
/// burst holds the channel until its last beat has been transferred.
class Channel {
 public:
  explicit Channel(std::size_t num_initiators = 0);

  /// Presents a request. At most one request per initiator may be present.
  void present(Request* req);
  [[nodiscard]] bool has_request(InitiatorId who) const { return slots_.at(who) != nullptr; }

  /// Returns the burst allowed to move a beat this cycle (arbitrating a new
  /// holder if the channel is free), or nullptr when nothing is pending.
  Request* holder();

  /// Records that the holder moved one beat at `cycle`. Returns the request
  /// if that was its last beat (the channel is then free).
  Request* beat_transferred(Cycle cycle);

  [[nodiscard]] bool idle() const { return holder_ == kNone && pending_ == 0; }
  [[nodiscard]] std::uint64_t stall_cycles() const { return stall_cycles_; }
  void count_stall() { ++stall_cycles_; }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<Request*> slots_;
  RoundRobin rr_;
  std::size_t holder_ = kNone;
  std::size_t pending_ = 0;
  std::uint64_t stall_cycles_ = 0;
};

}  // namespace mcsim
