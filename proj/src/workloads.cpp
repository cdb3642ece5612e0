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

#include "mcsim/workloads.hpp"

#include <algorithm>

namespace mcsim {

const char* to_string(TaskKind k) {
  switch (k) {
    case TaskKind::StrideReader: return "stride_reader";
    case TaskKind::DmaLinear: return "dma_linear";
    case TaskKind::DoubleBufferedAccel: return "double_buffered";
  }
  return "?";
}

TaskKind task_kind_from_string(const std::string& s) {
  if (s == "stride_reader") return TaskKind::StrideReader;
  if (s == "dma_linear") return TaskKind::DmaLinear;
  if (s == "double_buffered") return TaskKind::DoubleBufferedAccel;
  throw ConfigError("unknown task kind '" + s + "'");
}

std::uint32_t TaskSpec::max_burst(Op dir) const {
  switch (kind) {
    case TaskKind::StrideReader: return dir == Op::Read ? 1 : 0;
    case TaskKind::DmaLinear: {
      const std::uint64_t total = bytes / beat_bytes;
      return static_cast<std::uint32_t>(std::min<std::uint64_t>(burst_beats, total));
    }
    case TaskKind::DoubleBufferedAccel: {
      if (dir == Op::Write) return 0;
      const std::uint64_t total = tile_bytes / beat_bytes;
      return static_cast<std::uint32_t>(std::min<std::uint64_t>(burst_beats, total));
    }
  }
  return 0;
}

void validate(const TaskSpec& s) {
  const std::string who = "task '" + s.name + "': ";
  if (!is_pow2(s.beat_bytes)) throw ConfigError(who + "beat_bytes must be a power of two");
  if (s.write_data_interval < 1) throw ConfigError(who + "write_data_interval must be >= 1");
  switch (s.kind) {
    case TaskKind::StrideReader:
      if (s.stride < s.beat_bytes) throw ConfigError(who + "stride must be >= beat_bytes");
      if (s.base % s.beat_bytes != 0 || s.stride % s.beat_bytes != 0) {
        throw ConfigError(who + "base and stride must be beat aligned");
      }
      if (s.passes < 1) throw ConfigError(who + "passes must be >= 1");
      break;
    case TaskKind::DmaLinear:
      if (s.bytes == 0 || s.bytes % s.beat_bytes != 0) {
        throw ConfigError(who + "bytes must be a non-zero multiple of beat_bytes");
      }
      if (s.burst_beats < 1 || s.burst_beats > kMaxBurstBeats) throw ConfigError(who + "burst_beats must be in [1, 256]");
      if (s.outstanding < 1) throw ConfigError(who + "outstanding must be >= 1");
      if (s.src % s.beat_bytes != 0 || s.dst % s.beat_bytes != 0) {
        throw ConfigError(who + "src and dst must be beat aligned");
      }
      break;
    case TaskKind::DoubleBufferedAccel:
      if (s.num_tiles < 1) throw ConfigError(who + "num_tiles must be >= 1");
      if (s.tile_bytes == 0 || s.tile_bytes % s.beat_bytes != 0) {
        throw ConfigError(who + "tile_bytes must be a non-zero multiple of beat_bytes");
      }
      if (s.burst_beats < 1 || s.burst_beats > kMaxBurstBeats) throw ConfigError(who + "burst_beats must be in [1, 256]");
      if (s.base % s.beat_bytes != 0) throw ConfigError(who + "base must be beat aligned");
      break;
  }
}

std::vector<Transaction> gen_stride_reader(const TaskSpec& spec) {
  std::vector<Transaction> out;
  out.reserve(spec.count);
  for (std::uint64_t i = 0; i < spec.count; ++i) {
    Transaction t;
    t.txn_id = i;
    t.initiator = spec.initiator;
    t.op = Op::Read;
    t.addr = spec.base + i * spec.stride;
    t.beats = 1;
    t.beat_bytes = spec.beat_bytes;
    t.part_id = spec.part_id;
    t.criticality = spec.criticality;
    out.push_back(t);
  }
  return out;
}

DmaStream gen_dma_linear(const TaskSpec& spec) {
  DmaStream s;
  const std::uint64_t burst_bytes = std::uint64_t{spec.burst_beats} * spec.beat_bytes;
  TxnId id = 0;
  for (std::uint64_t off = 0; off < spec.bytes; off += burst_bytes) {
    const auto beats = static_cast<std::uint32_t>(std::min(burst_bytes, spec.bytes - off) / spec.beat_bytes);
    Transaction t;
    t.initiator = spec.initiator;
    t.beats = beats;
    t.beat_bytes = spec.beat_bytes;
    t.part_id = spec.part_id;
    t.criticality = spec.criticality;
    t.txn_id = id++;
    t.op = Op::Read;
    t.addr = spec.src + off;
    s.reads.push_back(t);
    t.txn_id = id++;
    t.op = Op::Write;
    t.addr = spec.dst + off;
    s.writes.push_back(t);
  }
  return s;
}

DoubleBufferPlan double_buffer_plan(Cycle transfer_per_tile, Cycle compute_per_tile, std::uint32_t num_tiles) {
  DoubleBufferPlan p;
  for (std::uint32_t i = 0; i < num_tiles; ++i) {
    Cycle start = i == 0 ? 0 : p.load_end[i - 1];
    if (i >= 2) start = std::max(start, p.compute_end[i - 2]);
    p.load_end.push_back(start + transfer_per_tile);
    const Cycle ready = i == 0 ? p.load_end[i] : std::max(p.load_end[i], p.compute_end[i - 1]);
    p.compute_end.push_back(ready + compute_per_tile);
  }
  return p;
}

// ---------------------------------------------------------------------------

Transaction* Task::make(Op op, Addr addr, std::uint32_t beats, Cycle now) {
  auto t = std::make_unique<Transaction>();
  t->txn_id = (std::uint64_t{spec_.initiator} << 40) | seq_++;
  t->initiator = spec_.initiator;
  t->op = op;
  t->addr = addr;
  t->beats = beats;
  t->beat_bytes = spec_.beat_bytes;
  t->part_id = spec_.part_id;
  t->criticality = spec_.criticality;
  if (stats_.started == kNever) stats_.started = now;
  Transaction* raw = t.get();
  live_.emplace(raw->txn_id, std::move(t));
  return raw;
}

void Task::retire(Transaction* txn, std::uint32_t phase) {
  ++stats_.transactions;
  stats_.beats += txn->beats;
  if (txn->decode_error) ++stats_.decode_errors;
  stats_.accesses.push_back({txn->t_issue, txn->t_complete, phase});
  live_.erase(txn->txn_id);
}

namespace {

class StrideTask final : public Task {
 public:
  explicit StrideTask(TaskSpec spec) : Task(std::move(spec)), total_(spec_.count * spec_.passes) {
    next_issue_ = spec_.start;
  }

  Transaction* issue(Op dir, Cycle now) override {
    if (dir != Op::Read || waiting_ || issued_ >= total_ || now < next_issue_) return nullptr;
    waiting_ = true;
    const std::uint64_t i = issued_++ % spec_.count;
    return make(Op::Read, spec_.base + i * spec_.stride, 1, now);
  }

  void complete(Transaction* txn, Cycle now) override {
    const auto pass = static_cast<std::uint32_t>((issued_ - 1) / spec_.count);
    retire(txn, pass);
    waiting_ = false;
    next_issue_ = now + spec_.gap_cycles;
    if (issued_ % spec_.count == 0) ++stats_.phases;
    if (issued_ == total_) stats_.finished = now;
  }

  [[nodiscard]] bool finished() const override { return issued_ == total_ && !waiting_; }

  [[nodiscard]] Cycle next_wake(Cycle now) const override {
    if (waiting_ || issued_ >= total_) return kNever;
    return next_issue_ > now ? next_issue_ : kNever;
  }

 private:
  std::uint64_t total_;
  std::uint64_t issued_ = 0;
  bool waiting_ = false;
  Cycle next_issue_ = 0;
};

class DmaTask final : public Task {
 public:
  explicit DmaTask(TaskSpec spec) : Task(std::move(spec)), stream_(gen_dma_linear(spec_)) {}

  Transaction* issue(Op dir, Cycle now) override {
    if (now < spec_.start) return nullptr;
    const std::uint64_t n = stream_.reads.size();
    if (dir == Op::Read) {
      if (!spec_.loop && reads_issued_ >= n) return nullptr;
      if (reads_issued_ - writes_done_ >= spec_.outstanding) return nullptr;
      const auto& t = stream_.reads[reads_issued_++ % n];
      return make(Op::Read, t.addr, t.beats, now);
    }
    if (writes_issued_ >= reads_done_) return nullptr;
    const auto& t = stream_.writes[writes_issued_++ % n];
    return make(Op::Write, t.addr, t.beats, now);
  }

  void complete(Transaction* txn, Cycle now) override {
    const std::uint64_t n = stream_.reads.size();
    if (txn->op == Op::Read) {
      retire(txn, static_cast<std::uint32_t>(reads_done_ / n));
      ++reads_done_;
      return;
    }
    retire(txn, static_cast<std::uint32_t>(writes_done_ / n));
    ++writes_done_;
    if (writes_done_ % n == 0) ++stats_.phases;
    if (!spec_.loop && writes_done_ == n) stats_.finished = now;
  }

  [[nodiscard]] bool finished() const override {
    return !spec_.loop && writes_done_ == stream_.reads.size();
  }

  [[nodiscard]] Cycle next_wake(Cycle now) const override { return now < spec_.start ? spec_.start : kNever; }

 private:
  DmaStream stream_;
  std::uint64_t reads_issued_ = 0;
  std::uint64_t reads_done_ = 0;
  std::uint64_t writes_issued_ = 0;
  std::uint64_t writes_done_ = 0;
};

class AccelTask final : public Task {
 public:
  AccelTask(TaskSpec spec, ComputeModel compute)
      : Task(std::move(spec)),
        compute_(std::move(compute)),
        load_end_(spec_.num_tiles, kNever),
        compute_end_(spec_.num_tiles, kNever),
        bursts_done_(spec_.num_tiles, 0) {
    const std::uint64_t burst_bytes = std::uint64_t{spec_.burst_beats} * spec_.beat_bytes;
    bursts_per_tile_ = ceil_div(spec_.tile_bytes, burst_bytes);
    if (!compute_) {
      const Cycle c = spec_.compute_cycles_per_tile;
      compute_ = [c](std::uint32_t, Cycle) { return c; };
    }
  }

  Transaction* issue(Op dir, Cycle now) override {
    if (dir != Op::Read || now < spec_.start || load_tile_ >= spec_.num_tiles) return nullptr;
    if (load_tile_ >= 2 && !(compute_end_[load_tile_ - 2] <= now)) return nullptr;
    const std::uint64_t burst_bytes = std::uint64_t{spec_.burst_beats} * spec_.beat_bytes;
    const std::uint64_t off = load_burst_ * burst_bytes;
    const auto beats = static_cast<std::uint32_t>(std::min(burst_bytes, spec_.tile_bytes - off) / spec_.beat_bytes);
    const Addr addr = spec_.base + std::uint64_t{load_tile_} * spec_.tile_bytes + off;
    Transaction* t = make(Op::Read, addr, beats, now);
    tile_of_[t->txn_id] = load_tile_;
    if (++load_burst_ == bursts_per_tile_) {
      load_burst_ = 0;
      ++load_tile_;
    }
    return t;
  }

  void complete(Transaction* txn, Cycle now) override {
    const std::uint32_t tile = tile_of_.at(txn->txn_id);
    tile_of_.erase(txn->txn_id);
    retire(txn, tile);
    if (++bursts_done_[tile] == bursts_per_tile_) load_end_[tile] = now;
    schedule_compute();
  }

  void advance(Cycle now) override {
    schedule_compute();
    while (stats_.phases < spec_.num_tiles && compute_end_[stats_.phases] <= now) ++stats_.phases;
    if (stats_.phases == spec_.num_tiles && stats_.finished == kNever) stats_.finished = compute_end_.back();
  }

  [[nodiscard]] bool finished() const override { return stats_.finished != kNever; }

  [[nodiscard]] Cycle next_wake(Cycle now) const override {
    Cycle w = now < spec_.start ? spec_.start : kNever;
    for (Cycle c : compute_end_) {
      if (c != kNever && c > now) w = std::min(w, c);
    }
    return w;
  }

 private:
  void schedule_compute() {
    while (next_compute_ < spec_.num_tiles && load_end_[next_compute_] != kNever) {
      const std::uint32_t i = next_compute_;
      Cycle start = load_end_[i];
      if (i > 0) start = std::max(start, compute_end_[i - 1]);
      compute_end_[i] = start + compute_(i, start);
      ++next_compute_;
    }
  }

  ComputeModel compute_;
  std::vector<Cycle> load_end_;
  std::vector<Cycle> compute_end_;
  std::vector<std::uint64_t> bursts_done_;
  std::uint64_t bursts_per_tile_ = 1;
  std::uint32_t load_tile_ = 0;
  std::uint64_t load_burst_ = 0;
  std::uint32_t next_compute_ = 0;
  std::unordered_map<TxnId, std::uint32_t> tile_of_;
};

}  // namespace

std::unique_ptr<Task> make_task(const TaskSpec& spec, ComputeModel compute) {
  validate(spec);
  switch (spec.kind) {
    case TaskKind::StrideReader: return std::make_unique<StrideTask>(spec);
    case TaskKind::DmaLinear: return std::make_unique<DmaTask>(spec);
    case TaskKind::DoubleBufferedAccel: return std::make_unique<AccelTask>(spec, std::move(compute));
  }
  throw ConfigError("unknown task kind");
}

}  // namespace mcsim
