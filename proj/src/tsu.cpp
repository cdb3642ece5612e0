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

#include "mcsim/tsu.hpp"

#include <algorithm>

namespace mcsim {

void validate(const TsuConfig& cfg) {
  if (cfg.period_cycles < 1) throw ConfigError("tsu: period_cycles must be >= 1");
  if (cfg.tru_on && cfg.budget_beats < 1) throw ConfigError("tsu: budget_beats must be >= 1 when the TRU is on");
  if (cfg.wb_on && cfg.wb_depth_beats < 1) throw ConfigError("tsu: wb_depth_beats must be >= 1 when the WB is on");
}

TruState tru_init(const TsuConfig& cfg, Cycle start) { return TruState{start, cfg.budget_beats}; }

void tru_refresh(TruState& state, const TsuConfig& cfg, Cycle cycle) {
  if (cycle < state.period_start + cfg.period_cycles) return;
  const Cycle periods = (cycle - state.period_start) / cfg.period_cycles;
  state.period_start += periods * cfg.period_cycles;
  state.budget_left = cfg.budget_beats;
}

std::uint32_t tru_grant(TruState& state, const TsuConfig& cfg, std::uint32_t want, Cycle cycle) {
  tru_refresh(state, cfg, cycle);
  const std::uint32_t granted = std::min(want, state.budget_left);
  state.budget_left -= granted;
  return granted;
}

std::vector<Transaction> gbs_split(const Transaction& txn, std::uint32_t split_beats) {
  if (split_beats == 0 || split_beats >= txn.beats) return {txn};
  std::vector<Transaction> out;
  out.reserve(ceil_div(txn.beats, split_beats));
  std::uint32_t consumed = 0;
  while (consumed < txn.beats) {
    Transaction frag = txn;
    frag.beats = std::min(split_beats, txn.beats - consumed);
    frag.addr = txn.addr + std::uint64_t{consumed} * txn.beat_bytes;
    out.push_back(frag);
    consumed += frag.beats;
  }
  return out;
}

// ---------------------------------------------------------------------------
// WriteBuffer

bool WriteBuffer::offer_beat(TxnId txn_id, std::uint32_t fragment, std::uint32_t fragment_beats,
                             std::uint32_t beat_index, Cycle /*cycle*/) {
  if (occupancy_ >= depth_) return false;
  if (entries_.empty() || entries_.back().txn_id != txn_id || entries_.back().fragment != fragment ||
      entries_.back().received == entries_.back().beats) {
    if (beat_index != 0) throw ConfigError("write buffer: fragment beats offered out of order");
    entries_.push_back(Entry{txn_id, fragment, fragment_beats, 0, 0});
  }
  auto& e = entries_.back();
  if (beat_index != e.received) throw ConfigError("write buffer: beat offered out of order");
  ++e.received;
  ++occupancy_;
  return true;
}

bool WriteBuffer::head_eligible() const {
  if (entries_.empty()) return false;
  const auto& h = entries_.front();
  return h.received == h.beats || occupancy_ == depth_ || h.drained > 0;
}

bool WriteBuffer::can_drain() const {
  return !entries_.empty() && entries_.front().drained < entries_.front().received;
}

bool WriteBuffer::drain_beat(Cycle /*cycle*/) {
  if (!can_drain()) throw ConfigError("write buffer: drain with no data");
  auto& h = entries_.front();
  ++h.drained;
  --occupancy_;
  if (h.drained == h.beats) {
    entries_.pop_front();
    return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Latency bound

Cycle ServiceModel::cost(Addr addr, std::uint32_t beats, std::uint32_t beat_bytes) const {
  Cycle c = per_request + Cycle{beats} * cycles_per_beat;
  if (per_line > 0 && line_bytes > 0 && beats > 0) {
    const Addr last = addr + std::uint64_t{beats} * beat_bytes - 1;
    c += (last / line_bytes - addr / line_bytes + 1) * per_line;
  }
  return c;
}

Cycle tsu_latency_bound(const TsuConfig& cfg, std::uint32_t txn_beats, Cycle service_cycles_per_beat) {
  Transaction txn;
  txn.beats = txn_beats;
  ServiceModel service;
  service.cycles_per_beat = service_cycles_per_beat;
  BoundContext ctx;
  ctx.budget_left = cfg.budget_beats;
  ctx.cycles_to_refill = cfg.period_cycles;
  return tsu_latency_bound(cfg, txn, service, ctx);
}

Cycle tsu_latency_bound(const TsuConfig& cfg, const Transaction& txn, const ServiceModel& service,
                        const BoundContext& ctx) {
  using I = std::int64_t;
  const bool tru = cfg.tru_on;
  const bool rival = tru && cfg.joint_budget && ctx.rival_beats > 0;
  const I budget_per_period = cfg.budget_beats;
  const I period = static_cast<I>(cfg.period_cycles);
  const I rival_take = std::min<I>(ctx.rival_beats, budget_per_period);
  const bool is_write = txn.op == Op::Write;
  const bool wb_fill = is_write && cfg.wb_on && ctx.write_data_interval > 0;
  const I d = static_cast<I>(ctx.write_data_interval);

  I budget = ctx.budget_left;
  I next_refill = static_cast<I>(ctx.cycles_to_refill);
  bool lead = ctx.priority_at_refill;
  I prev_done = ctx.predecessor_done;
  I landed = static_cast<I>(ctx.write_data_start) - d;
  // Without the write buffer, beat i of the transaction cannot move before
  // its data arrives at write_data_start + i * d.
  const bool direct_write = is_write && !wb_fill;
  const I direct_d = std::max<I>(1, d);
  I beat_index = 0;

  for (const auto& frag : gbs_split(txn, cfg.effective_split())) {
    I eligible = 0;
    Cycle per_beat = service.cycles_per_beat;
    if (wb_fill) {
      const I depth = cfg.wb_depth_beats;
      // Earlier data still landing (a predecessor's or the previous
      // fragment's) lands at least one cycle before it drains, and stalls
      // shift the whole stream.
      const bool behind = frag.addr != txn.addr || ctx.data_pending;
      const I start = std::max(landed + d, behind ? prev_done - 1 + d : prev_done);
      eligible = start + (std::min<I>(frag.beats, depth) - 1) * d + 1;
      landed = start + (I{frag.beats} - 1) * d;
      if (frag.beats > depth) per_beat = std::max<Cycle>(per_beat, ctx.write_data_interval);
    } else if (is_write && ctx.write_data_interval > 1) {
      per_beat = std::max<Cycle>(per_beat, ctx.write_data_interval);
    }
    ServiceModel chunk_service = service;
    chunk_service.cycles_per_beat = per_beat;

    I remaining = frag.beats;
    Addr addr = frag.addr;
    while (remaining > 0) {
      I t = std::max(prev_done + 1, eligible);
      if (direct_write) t = std::max(t, static_cast<I>(ctx.write_data_start) + beat_index * direct_d);
      // Whole fragments, or budget-sized pieces of larger ones (see release()).
      const I granted = tru ? std::min(remaining, budget_per_period) : remaining;
      if (tru && !rival) {
        for (;;) {
          while (next_refill <= t) {
            budget = budget_per_period;
            next_refill += period;
          }
          if (budget >= granted) break;
          t = next_refill;
        }
        budget -= granted;
      } else if (rival) {
        // The leading direction gets a full budget at the refill; the other
        // one gets what the rival's largest request leaves, if it fits.
        for (;;) {
          while (next_refill < t) {
            next_refill += period;
            lead = !lead;
          }
          t = next_refill;
          const bool mine = lead;
          next_refill += period;
          lead = !lead;
          if (mine || granted <= budget_per_period - rival_take) break;
        }
      }
      const auto g = static_cast<std::uint32_t>(granted);
      prev_done = t + static_cast<I>(chunk_service.cost(addr, g, txn.beat_bytes)) - 1;
      remaining -= granted;
      beat_index += granted;
      addr += std::uint64_t{g} * txn.beat_bytes;
    }
  }
  return static_cast<Cycle>(std::max<I>(prev_done + 1, 0));
}

// ---------------------------------------------------------------------------
// Shaper

Shaper::Shaper(InitiatorId id, const TsuConfig& cfg, Cycle now)
    : id_(id),
      cfg_(cfg),
      tru_(tru_init(cfg, now)),
      tru_write_(tru_init(cfg, now)),
      period_origin_(now),
      wb_(cfg.wb_depth_beats) {
  validate(cfg_);
}

void Shaper::reconfigure(const TsuConfig& cfg, Cycle now) {
  validate(cfg);
  if (!wb_.empty() && cfg.wb_depth_beats != cfg_.wb_depth_beats) {
    throw ConfigError("tsu: write buffer depth changed while it holds data");
  }
  cfg_ = cfg;
  tru_ = tru_init(cfg_, now);
  tru_write_ = tru_init(cfg_, now);
  period_origin_ = now;
  if (wb_.empty()) wb_ = WriteBuffer(cfg_.wb_depth_beats);
}

IssueSnapshot Shaper::accept(Transaction* txn, Cycle now, Cycle write_data_interval) {
  Path& p = path(txn->op);
  if (p.txn != nullptr) throw ConfigError("tsu: issue while the input register is occupied");
  txn->t_issue = now;
  p.txn = txn;
  p.frags = gbs_split(*txn, cfg_.effective_split());
  p.next_frag = 0;
  p.frag_released = 0;
  p.txn_released = 0;

  IssueSnapshot snap;
  snap.regulated = cfg_.tru_on;
  if (cfg_.tru_on) {
    TruState& st = (!cfg_.joint_budget && txn->op == Op::Write) ? tru_write_ : tru_;
    tru_refresh(st, cfg_, now);
    snap.budget_left = st.budget_left;
    snap.cycles_to_refill = tru_next_refill(st, cfg_) - now;
    snap.priority_at_refill = has_priority(txn->op, tru_next_refill(st, cfg_));
  }
  if (p.inflight) {
    snap.has_predecessor = true;
    snap.predecessor_release = p.inflight->released;
    snap.predecessor_addr = p.inflight->addr;
    snap.predecessor_beats = p.inflight->beats;
  }

  if (txn->op == Op::Write) {
    WriteData wd;
    wd.txn = txn;
    for (const auto& f : p.frags) wd.frag_beats.push_back(f.beats);
    wd.interval = std::max<Cycle>(1, write_data_interval);
    wd.start = std::max(now, data_free_at_);
    // A stalled stream stays shifted: the next beat follows the last landed one.
    if (cfg_.wb_on && wdata_.empty()) wd.start = std::max(wd.start, data_resume_at_);
    snap.data_pending = cfg_.wb_on && !wdata_.empty();
    wd.next_offer = wd.start;
    data_free_at_ = wd.start + Cycle{txn->beats} * wd.interval;
    snap.write_data_start = wd.start - now;
    wdata_.push_back(std::move(wd));
  }
  return snap;
}

const Shaper::WriteData* Shaper::data_for(TxnId id) const {
  for (const auto& wd : wdata_) {
    if (wd.txn->txn_id == id) return &wd;
  }
  return nullptr;
}

bool Shaper::ready_to_release(Op dir) const {
  const Path& p = path(dir);
  if (p.txn == nullptr || p.inflight || p.next_frag >= p.frags.size()) return false;
  if (dir == Op::Write && cfg_.wb_on) {
    const auto* head = wb_.head();
    if (head == nullptr || head->txn_id != p.txn->txn_id || head->fragment != p.next_frag) return false;
    return wb_.head_eligible();
  }
  return true;
}

Request* Shaper::release_one(Op dir, Cycle now, std::uint32_t beats) {
  Path& p = path(dir);
  const Transaction& frag = p.frags[p.next_frag];
  auto req = std::make_unique<Request>();
  req->owner = p.txn;
  req->txn_id = p.txn->txn_id;
  req->initiator = id_;
  req->op = dir;
  req->addr = frag.addr + std::uint64_t{p.frag_released} * frag.beat_bytes;
  req->beats = beats;
  req->beat_bytes = frag.beat_bytes;
  req->part_id = frag.part_id;
  req->fragment = static_cast<std::uint32_t>(p.next_frag);
  req->txn_beat_offset = p.txn_released;
  req->released = now;

  p.frag_released += beats;
  p.txn_released += beats;
  if (p.frag_released == frag.beats) {
    ++p.next_frag;
    p.frag_released = 0;
  }
  req->last_of_txn = p.next_frag == p.frags.size();
  if (req->last_of_txn) p.txn = nullptr;

  releases_.push_back({now, beats});
  p.inflight = std::move(req);
  return p.inflight.get();
}

bool Shaper::has_priority(Op dir, Cycle cycle) const {
  // Reads lead in even periods, writes in odd ones.
  const bool odd = ((cycle - period_origin_) / cfg_.period_cycles) % 2 == 1;
  return odd == (dir == Op::Write);
}

std::vector<Request*> Shaper::release(Cycle now) {
  std::vector<Request*> out;
  const bool r_ready = ready_to_release(Op::Read);
  const bool w_ready = ready_to_release(Op::Write);
  if (!r_ready && !w_ready) return out;

  std::array<Op, 2> order{Op::Read, Op::Write};
  if (cfg_.tru_on && cfg_.joint_budget && has_priority(Op::Write, now)) order = {Op::Write, Op::Read};
  for (Op dir : order) {
    if (!(dir == Op::Read ? r_ready : w_ready)) continue;
    const Path& p = path(dir);
    const std::uint32_t want = p.frags[p.next_frag].beats - p.frag_released;
    std::uint32_t granted = want;
    if (cfg_.tru_on) {
      TruState& st = (cfg_.joint_budget || dir == Op::Read) ? tru_ : tru_write_;
      tru_refresh(st, cfg_, now);
      // Only whole fragments go out; one larger than the budget leaves in
      // budget-sized pieces, each taking a full period's budget.
      const std::uint32_t need = std::min(want, cfg_.budget_beats);
      if (st.budget_left < need) {
        ++tru_stall_cycles_;
        continue;
      }
      granted = tru_grant(st, cfg_, need, now);
    }
    out.push_back(release_one(dir, now, granted));
  }
  return out;
}

bool Shaper::write_beat_ready(const Request& req, Cycle now) const {
  if (cfg_.wb_on) {
    const auto* head = wb_.head();
    return head != nullptr && head->txn_id == req.txn_id && head->fragment == req.fragment &&
           wb_.can_drain();
  }
  const WriteData* wd = data_for(req.txn_id);
  if (wd == nullptr) return true;
  const Cycle beat = req.txn_beat_offset + req.done;
  return now >= wd->start + beat * wd->interval;
}

void Shaper::on_beat(const Request& req, Cycle now) {
  if (req.op == Op::Write && cfg_.wb_on) wb_.drain_beat(now);
}

bool Shaper::on_request_done(Request* req, Cycle /*now*/) {
  const bool last = req->last_of_txn;
  const Op dir = req->op;
  if (last && dir == Op::Write && !cfg_.wb_on) {
    for (auto it = wdata_.begin(); it != wdata_.end(); ++it) {
      if (it->txn->txn_id == req->txn_id) {
        wdata_.erase(it);
        break;
      }
    }
  }
  path(dir).inflight.reset();
  return last;
}

void Shaper::fill(Cycle now) {
  if (!cfg_.wb_on || wdata_.empty()) return;
  WriteData& wd = wdata_.front();
  if (now < wd.next_offer) return;
  std::uint32_t frag = 0;
  std::uint32_t base = 0;
  while (wd.landed >= base + wd.frag_beats[frag]) base += wd.frag_beats[frag++];
  if (!wb_.offer_beat(wd.txn->txn_id, frag, wd.frag_beats[frag], wd.landed - base, now)) {
    ++wb_stall_cycles_;
    return;
  }
  ++wd.landed;
  wd.next_offer = now + wd.interval;
  if (wd.landed == wd.txn->beats) {
    const Cycle next = wd.next_offer;
    data_resume_at_ = next;
    wdata_.pop_front();
    if (!wdata_.empty()) wdata_.front().next_offer = std::max(wdata_.front().next_offer, next);
  }
}

std::uint32_t Shaper::lookahead_beats(Op dir, Cycle now) const {
  const Path& p = path(dir);
  if (p.txn == nullptr) return 0;
  // Buffered writes hold their address until the fragment's data is in.
  if (dir == Op::Write && cfg_.wb_on) return 0;
  const std::uint32_t rest = p.txn->beats - p.txn_released;
  if (!cfg_.tru_on) return rest;
  const TruState& st = (!cfg_.joint_budget && dir == Op::Write) ? tru_write_ : tru_;
  const std::uint32_t left = now >= tru_next_refill(st, cfg_) ? cfg_.budget_beats : st.budget_left;
  return std::min(rest, left);
}

bool Shaper::idle() const {
  return paths_[0].txn == nullptr && paths_[1].txn == nullptr && !paths_[0].inflight &&
         !paths_[1].inflight && wdata_.empty() && wb_.empty();
}

}  // namespace mcsim
