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

#include "mcsim/system.hpp"

#include <algorithm>

namespace mcsim {

namespace {

constexpr ComponentId kSystemTick = 0;
constexpr ComponentId kActions = 1;

// Worst case a DCSPM beat waits: the other direction of its port may take
// the port once, and each of the two may lose its bank once.
constexpr Cycle kSpmCyclesPerBeat = 4;

std::size_t dir_index(Op op) { return op == Op::Read ? 0 : 1; }

}  // namespace

Soc::Soc(SocConfig cfg, std::vector<TaskSpec> tasks, std::vector<TsuConfig> tsu, std::vector<TimedAction> actions)
    : cfg_(std::move(cfg)),
      specs_(std::move(tasks)),
      tsu_cfg_(std::move(tsu)),
      actions_(std::move(actions)),
      llc_(cfg_.llc, cfg_.hyperram),
      spm_(cfg_.spm) {
  if (tsu_cfg_.size() != specs_.size()) throw ConfigError("soc: one TSU configuration per task required");
  if (cfg_.llc.beat_bytes != cfg_.beat_bytes) throw ConfigError("soc: llc beat_bytes differs from the bus");

  routes_.add(cfg_.hyperram_base, cfg_.hyperram_bytes, Route{EndpointKind::Dpllc, 0});
  for (const auto& w : cfg_.spm.alias_windows) {
    routes_.add(w.base, cfg_.spm.total_bytes, Route{EndpointKind::Dcspm, w.port});
  }

  const std::size_t n = specs_.size();
  llc_channels_.push_back({Channel(n), Channel(n)});
  for (std::uint32_t p = 0; p < cfg_.spm.ports; ++p) spm_channels_.push_back({Channel(n), Channel(n)});

  faults_sorted_ = cfg_.faults;
  std::stable_sort(faults_sorted_.begin(), faults_sorted_.end(),
                   [](const amr::FaultEvent& a, const amr::FaultEvent& b) { return a.cycle < b.cycle; });
  if (!faults_sorted_.empty()) amr::validate(cfg_.amr);

  for (std::size_t i = 0; i < n; ++i) {
    specs_[i].initiator = static_cast<InitiatorId>(i);
    if (specs_[i].beat_bytes != cfg_.beat_bytes) {
      throw ConfigError("task '" + specs_[i].name + "': beat_bytes differs from the bus");
    }
    ComputeModel compute;
    if (specs_[i].amr_compute) {
      const std::uint64_t units = specs_[i].units_per_tile;
      compute = [this, units](std::uint32_t tile, Cycle start) { return amr_compute(tile, start, units); };
    }
    tasks_.push_back(make_task(specs_[i], std::move(compute)));
    shapers_.push_back(std::make_unique<Shaper>(static_cast<InitiatorId>(i), tsu_cfg_[i], 0));
  }
  init_stats_.resize(n);
  result_.task_llc_hits.assign(n, 0);
  result_.task_llc_misses.assign(n, 0);
  finish_reported_.assign(n, false);
}

Soc::~Soc() = default;

Channel& Soc::channel(const Route& r, Op op) {
  auto& set = r.endpoint == EndpointKind::Dpllc ? llc_channels_ : spm_channels_;
  return set.at(r.port)[dir_index(op)];
}

void Soc::event(Cycle cycle, std::string component, std::string kind, nlohmann::ordered_json fields) {
  result_.events.push_back({cycle, std::move(component), std::move(kind), std::move(fields)});
}

std::uint32_t Soc::max_request_beats(InitiatorId who, Op op) const {
  std::uint32_t b = specs_[who].max_burst(op);
  const std::uint32_t split = tsu_cfg_[who].effective_split();
  if (split > 0) b = std::min(b, split);
  return b;
}

ServiceModel Soc::service_model(const Route& route, InitiatorId who, Op op) const {
  ServiceModel m;
  const Cycle line_fetch = cfg_.hyperram.access_latency_cycles + Cycle{cfg_.llc.line_beats()} * cfg_.hyperram.cycles_per_beat;
  const std::uint64_t line_bytes = cfg_.llc.line_bytes;
  auto lines_of = [&](std::uint32_t beats) { return ceil_div(std::uint64_t{beats} * cfg_.beat_bytes, line_bytes) + 1; };

  if (route.endpoint == EndpointKind::Dcspm) {
    m.cycles_per_beat = kSpmCyclesPerBeat;
    for (std::size_t j = 0; j < specs_.size(); ++j) {
      if (j == who) continue;
      const std::uint32_t rb = max_request_beats(static_cast<InitiatorId>(j), op);
      const Cycle pb = std::max<Cycle>(kSpmCyclesPerBeat, op == Op::Write ? specs_[j].write_data_interval : 1);
      m.per_request += Cycle{rb} * pb;
    }
    return m;
  }

  // DPLLC: every line may miss behind the HyperRAM backlog left by the other
  // transactions in progress (a fill and a writeback per line, over the whole
  // transaction since later fragments may be looked up early) plus orphaned
  // writebacks.
  std::uint64_t max_lines = 0;
  for (const auto& spec : specs_) {
    for (Op d : {Op::Read, Op::Write}) {
      const std::uint32_t tb = spec.max_burst(d);
      if (tb > 0) max_lines = std::max(max_lines, lines_of(tb));
    }
  }
  const std::uint64_t holders = 2 * std::max(llc_channels_.size(), specs_.size());
  const Cycle backlog = 3 * 2 * holders * max_lines * line_fetch;
  m.cycles_per_beat = 1;
  m.per_line = 2 * line_fetch;
  m.line_bytes = cfg_.llc.line_bytes;
  m.per_request = backlog;
  for (std::size_t j = 0; j < specs_.size(); ++j) {
    if (j == who) continue;
    const std::uint32_t rb = max_request_beats(static_cast<InitiatorId>(j), op);
    if (rb == 0) continue;
    const Cycle pb = op == Op::Write ? std::max<Cycle>(1, specs_[j].write_data_interval) : 1;
    m.per_request += Cycle{rb} * pb + lines_of(rb) * m.per_line + backlog;
  }
  return m;
}

void Soc::apply(const TimedAction& a) {
  const Cycle now = kernel_.now();
  switch (a.kind) {
    case TimedAction::Kind::TsuReconfig:
      shapers_.at(a.initiator)->reconfigure(a.tsu, now);
      tsu_cfg_.at(a.initiator) = a.tsu;
      event(now, "tsu", "reconfigure", {{"initiator", a.initiator}});
      break;
    case TimedAction::Kind::LlcFlush: {
      const std::size_t warn = llc_.warnings().size();
      const auto n = llc_.flush_partition(a.part, now);
      event(now, "dpllc", "flush", {{"part_id", a.part}, {"lines", n}});
      for (std::size_t i = warn; i < llc_.warnings().size(); ++i) {
        event(now, "dpllc", "warning", {{"message", llc_.warnings()[i]}});
      }
      break;
    }
    case TimedAction::Kind::LlcReprogram: {
      const std::size_t warn = llc_.warnings().size();
      llc_.reprogram(a.table, now);
      event(now, "dpllc", "reprogram", {{"partitions", a.table.size()}});
      for (std::size_t i = warn; i < llc_.warnings().size(); ++i) {
        event(now, "dpllc", "warning", {{"message", llc_.warnings()[i]}});
      }
      break;
    }
  }
  schedule_tick(now);
}

void Soc::schedule_tick(Cycle at) {
  if (at >= next_tick_) return;
  next_tick_ = at;
  kernel_.schedule(at, kSystemTick, [this, at] {
    if (next_tick_ != at) return;  // superseded by an earlier tick
    next_tick_ = kNever;
    tick();
  });
}

Cycle Soc::amr_compute(std::uint32_t tile, Cycle start, std::uint64_t units) {
  const amr::Mode mode = cfg_.amr.mode;
  const Cycle nominal = amr::compute_cycles(cfg_.amr, mode, units);
  std::vector<amr::FaultEvent> slice;
  while (fault_cursor_ < faults_sorted_.size() && faults_sorted_[fault_cursor_].cycle < start + nominal) {
    slice.push_back(faults_sorted_[fault_cursor_++]);
  }
  const auto r = amr::run_workload(cfg_.amr, units, mode, slice, start);
  auto& s = result_.amr;
  ++s.compute_phases;
  s.faults_injected += r.faults_injected;
  s.faults_effective += r.faults_effective;
  s.detections += r.detections;
  s.recoveries += r.recoveries;
  s.masked += r.masked;
  s.undetected += r.undetected;
  s.unrecoverable += r.unrecoverable;
  s.cluster_restarts += r.cluster_restarts;
  s.recovery_cycles += r.recovery_cycles_total;
  for (std::uint64_t u = 0; u < units; ++u) {
    if (r.output[u] != amr::unit_value(u)) ++s.output_mismatches;
  }
  for (const auto& e : r.events) {
    event(e.cycle, "amr", e.kind, {{"tile", tile}, {"group", e.group}, {"core", e.core}, {"cost", e.cost}});
  }
  return r.cycles;
}

void Soc::issue_phase(Cycle now) {
  for (std::size_t i = 0; i < tasks_.size(); ++i) {
    Task& task = *tasks_[i];
    Shaper& sh = *shapers_[i];
    for (Op dir : {Op::Read, Op::Write}) {
      if (!sh.input_free(dir)) continue;
      Transaction* t = task.issue(dir, now);
      if (t == nullptr) continue;
      activity_ = true;
      const auto route = routes_.route_range(t->addr, std::uint64_t{t->beats} * t->beat_bytes);
      if (!route) {
        t->decode_error = true;
        t->t_issue = now;
        t->t_accept = now;
        t->t_complete = now + 1;
        ++result_.decode_errors;
        event(now, "xbar", "decode-error", {{"initiator", i}, {"addr", t->addr}});
        task.complete(t, now + 1);
        continue;
      }
      validate(*t);
      const IssueSnapshot snap = sh.accept(t, now, specs_[i].write_data_interval);
      if (snap.regulated) pending_bounds_[t->txn_id] = PendingBound{snap, sh.config()};
    }
  }
}

void Soc::release_phase(Cycle now) {
  for (std::size_t i = 0; i < shapers_.size(); ++i) {
    for (Request* req : shapers_[i]->release(now)) {
      activity_ = true;
      req->route = *routes_.route(req->addr);
      channel(req->route, req->op).present(req);
      init_stats_[i].beats_granted += req->beats;
      ++init_stats_[i].requests_released;
    }
  }
}

void Soc::move_beat(Channel& ch, Request* req, Cycle now) {
  activity_ = true;
  Shaper& sh = *shapers_[req->initiator];
  Transaction* txn = req->owner;
  if (txn->t_accept == kNever) txn->t_accept = now;
  sh.on_beat(*req, now);
  if (ch.beat_transferred(now) == nullptr) return;

  line_ready_.erase(req);
  const InitiatorId who = req->initiator;
  if (!sh.on_request_done(req, now)) return;  // req is gone from here on
  txn_lines_.erase(txn);
  txn->t_complete = now + 1;
  check_bound(*txn);
  tasks_[who]->complete(txn, now + 1);
}

void Soc::transfer_phase(Cycle now) {
  for (std::size_t p = 0; p < llc_channels_.size(); ++p) {
    for (Op dir : {Op::Read, Op::Write}) {
      Channel& ch = llc_channels_[p][dir_index(dir)];
      Request* r = ch.holder();
      if (r == nullptr) continue;
      auto it = line_ready_.find(r);
      if (it == line_ready_.end()) {
        // The burst's lines are looked up when it wins the channel, together
        // with the transaction's next fragments the TRU lets through at once.
        const std::uint64_t lb = cfg_.llc.line_bytes;
        auto& known = txn_lines_[r->owner];
        auto lookup = [&](Addr line) {
          auto [pos, fresh] = known.try_emplace(line, 0);
          if (fresh) {
            const auto res = llc_.lookup(line * lb, r->part_id, r->op, now);
            ++(res.hit ? result_.task_llc_hits : result_.task_llc_misses)[r->initiator];
            pos->second = res.ready;
          }
          return pos->second;
        };
        const Addr first = r->addr / lb;
        const Addr last = (r->addr + std::uint64_t{r->beats} * r->beat_bytes - 1) / lb;
        std::vector<Cycle> ready;
        for (Addr l = first; l <= last; ++l) ready.push_back(lookup(l));
        if (const std::uint32_t ahead = shapers_[r->initiator]->lookahead_beats(r->op, now); ahead > 0) {
          const Addr from = r->owner->beat_addr(r->txn_beat_offset + r->beats);
          for (Addr l = from / lb; l <= (from + std::uint64_t{ahead} * r->beat_bytes - 1) / lb; ++l) (void)lookup(l);
        }
        it = line_ready_.emplace(r, std::move(ready)).first;
        activity_ = true;
      }
      const std::size_t line = r->next_beat_addr() / cfg_.llc.line_bytes - r->addr / cfg_.llc.line_bytes;
      bool ok = it->second[line] <= now;
      if (ok && dir == Op::Write && !shapers_[r->initiator]->write_beat_ready(*r, now)) {
        ok = false;
        shapers_[r->initiator]->count_w_path_stall();
      }
      if (ok) {
        move_beat(ch, r, now);
      } else {
        ch.count_stall();
      }
    }
  }

  std::vector<SpmBeat> beats;
  std::vector<std::pair<Channel*, Request*>> who;
  for (std::uint32_t p = 0; p < spm_channels_.size(); ++p) {
    for (Op dir : {Op::Read, Op::Write}) {
      Channel& ch = spm_channels_[p][dir_index(dir)];
      Request* r = ch.holder();
      if (r == nullptr) continue;
      if (dir == Op::Write && !shapers_[r->initiator]->write_beat_ready(*r, now)) {
        shapers_[r->initiator]->count_w_path_stall();
        ch.count_stall();
        continue;
      }
      beats.push_back(SpmBeat{p, dir, r->next_beat_addr()});
      who.emplace_back(&ch, r);
    }
  }
  if (beats.empty()) return;
  const auto served = spm_.service(beats, now);
  for (std::size_t k = 0; k < beats.size(); ++k) {
    if (served[k]) {
      move_beat(*who[k].first, who[k].second, now);
    } else {
      who[k].first->count_stall();
    }
  }
}

void Soc::check_bound(const Transaction& txn) {
  const auto it = pending_bounds_.find(txn.txn_id);
  if (it == pending_bounds_.end()) return;
  const PendingBound pb = it->second;
  pending_bounds_.erase(it);

  const InitiatorId who = txn.initiator;
  const Route route = *routes_.route(txn.addr);
  const ServiceModel svc = service_model(route, who, txn.op);
  BoundContext ctx;
  ctx.budget_left = pb.snap.budget_left;
  ctx.cycles_to_refill = pb.snap.cycles_to_refill;
  const Cycle d = std::max<Cycle>(1, specs_[who].write_data_interval);
  if (pb.snap.has_predecessor) {
    ServiceModel ps = service_model(*routes_.route(pb.snap.predecessor_addr), who, txn.op);
    if (txn.op == Op::Write) ps.cycles_per_beat = std::max(ps.cycles_per_beat, d);
    const Cycle done = pb.snap.predecessor_release +
                       ps.cost(pb.snap.predecessor_addr, pb.snap.predecessor_beats, txn.beat_bytes) - 1;
    ctx.predecessor_done = static_cast<std::int64_t>(done) - static_cast<std::int64_t>(txn.t_issue);
  }
  const Op other = txn.op == Op::Read ? Op::Write : Op::Read;
  ctx.rival_beats = max_request_beats(who, other);
  ctx.priority_at_refill = pb.snap.priority_at_refill;
  if (txn.op == Op::Write) {
    ctx.write_data_interval = pb.cfg.wb_on ? d : (d > 1 ? d : 0);
    ctx.write_data_start = pb.snap.write_data_start;
    ctx.data_pending = pb.snap.data_pending;
  }
  const Cycle bound = tsu_latency_bound(pb.cfg, txn, svc, ctx);
  const Cycle lat = txn.latency();

  auto& b = result_.bounds;
  const std::int64_t slack = static_cast<std::int64_t>(bound) - static_cast<std::int64_t>(lat);
  b.min_slack = b.checked == 0 ? slack : std::min(b.min_slack, slack);
  ++b.checked;
  b.max_latency = std::max(b.max_latency, lat);
  b.max_bound = std::max(b.max_bound, bound);
  if (lat > bound) {
    ++b.violations;
    if (b.violations <= 100) {
      event(txn.t_complete, "tsu", "bound-violation",
            {{"initiator", who}, {"txn", txn.txn_id}, {"latency", lat}, {"bound", bound}});
    }
  }
}

bool Soc::all_done() const {
  bool any = false;
  for (const auto& t : tasks_) {
    if (t->spec().daemon()) continue;
    any = true;
    if (!t->finished()) return false;
  }
  if (any) return true;
  return std::all_of(tasks_.begin(), tasks_.end(), [](const auto& t) { return t->finished(); });
}

void Soc::tick() {
  const Cycle now = kernel_.now();
  activity_ = false;
  for (auto& t : tasks_) t->advance(now);
  issue_phase(now);
  release_phase(now);
  transfer_phase(now);
  for (auto& s : shapers_) s->fill(now);
  for (std::size_t i = 0; i < tasks_.size(); ++i) {
    tasks_[i]->advance(now);
    if (!finish_reported_[i] && tasks_[i]->finished()) {
      finish_reported_[i] = true;
      const auto& st = tasks_[i]->stats();
      event(st.finished, "task", "finish", {{"task", specs_[i].name}, {"started", st.started}});
    }
  }

  if (all_done()) {
    kernel_.stop();
    return;
  }
  bool busy = activity_;
  for (const auto& s : shapers_) busy = busy || !s->idle();
  for (const auto& t : tasks_) busy = busy || t->in_flight() > 0;
  if (busy) {
    schedule_tick(now + 1);
    return;
  }
  Cycle wake = kNever;
  for (const auto& t : tasks_) wake = std::min(wake, t->next_wake(now));
  if (wake != kNever) schedule_tick(wake);
}

RunResult Soc::run(Cycle run_limit) {
  for (const auto& a : actions_) {
    kernel_.schedule(a.cycle, kActions, [this, a] { apply(a); });
  }
  schedule_tick(0);
  kernel_.run_until(run_limit);

  result_.timeout = !all_done();
  Cycle end = 0;
  for (const auto& t : tasks_) {
    if (t->stats().finished != kNever) end = std::max(end, t->stats().finished);
  }
  result_.cycles = result_.timeout ? run_limit : end;
  if (result_.timeout) event(run_limit, "sim", "timeout", {{"run_limit", run_limit}});

  result_.specs = specs_;
  for (const auto& t : tasks_) result_.tasks.push_back(t->stats());
  for (std::size_t i = 0; i < shapers_.size(); ++i) {
    auto& s = init_stats_[i];
    s.tru_stall_cycles = shapers_[i]->tru_stall_cycles();
    s.wb_stall_cycles = shapers_[i]->wb_stall_cycles();
    s.w_path_stall_cycles = shapers_[i]->w_path_stall_cycles();
  }
  result_.initiators = init_stats_;
  for (const auto& [id, p] : llc_.config().partition_table) result_.llc[id];
  for (const auto& [id, c] : llc_.all_counters()) result_.llc[id] = c;
  for (std::uint32_t b = 0; b < cfg_.spm.num_banks; ++b) result_.spm_bank_conflicts.push_back(spm_.bank(b).conflict_count);
  result_.spm_port_stalls = spm_.port_stalls();
  result_.hyperram_accesses = llc_.hyperram().accesses();
  result_.reprogram_violations = llc_.reprogram_violations();
  result_.events_dispatched = kernel_.dispatched();
  std::stable_sort(result_.events.begin(), result_.events.end(),
                   [](const SimEvent& a, const SimEvent& b) { return a.cycle < b.cycle; });
  return std::move(result_);
}

}  // namespace mcsim
