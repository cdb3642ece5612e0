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

#include "mcsim/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <random>
#include <set>
#include <sstream>

#include "mcsim/rng.hpp"

namespace mcsim {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& e : v) s += "\n  " + e;
  return s;
}

/// Typed accessors that record errors instead of throwing, so one pass
/// reports every problem.
class Reader {
 public:
  std::vector<std::string> errors;

  void error(const std::string& path, const std::string& msg) { errors.push_back(path + ": " + msg); }

  bool is_object(const json& j, const std::string& path) {
    if (j.is_object()) return true;
    error(path, "expected an object");
    return false;
  }

  void keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) return;
    for (const auto& [k, v] : obj.items()) {
      const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; });
      if (!known) error(path + "." + k, "unknown key");
    }
  }

  std::uint64_t u64(const json& o, const char* key, std::uint64_t def, const std::string& path) {
    if (!o.is_object() || !o.contains(key)) return def;
    const json& v = o.at(key);
    const std::string where = path + "." + key;
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) {
      if (v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
      error(where, "must be non-negative");
      return def;
    }
    if (v.is_string()) {
      const auto s = v.get<std::string>();
      if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
        std::uint64_t out = 0;
        std::istringstream is(s.substr(2));
        is >> std::hex >> out;
        if (is && is.peek() == std::char_traits<char>::eof()) return out;
      }
      error(where, "'" + s + "' is not an integer or 0x-prefixed hex string");
      return def;
    }
    error(where, "expected an integer");
    return def;
  }

  std::uint32_t u32(const json& o, const char* key, std::uint32_t def, const std::string& path) {
    const std::uint64_t v = u64(o, key, def, path);
    if (v > 0xffff'ffffULL) {
      error(path + "." + key, "out of range");
      return def;
    }
    return static_cast<std::uint32_t>(v);
  }

  bool boolean(const json& o, const char* key, bool def, const std::string& path) {
    if (!o.is_object() || !o.contains(key)) return def;
    if (o.at(key).is_boolean()) return o.at(key).get<bool>();
    error(path + "." + key, "expected true or false");
    return def;
  }

  std::string str(const json& o, const char* key, const std::string& def, const std::string& path) {
    if (!o.is_object() || !o.contains(key)) return def;
    if (o.at(key).is_string()) return o.at(key).get<std::string>();
    error(path + "." + key, "expected a string");
    return def;
  }

  template <class F>
  void guard(const std::string& path, F&& f) {
    try {
      f();
    } catch (const ConfigError& e) {
      error(path, e.what());
    }
  }
};

TsuConfig parse_tsu(Reader& r, const json& j, const std::string& path) {
  TsuConfig c;
  if (!r.is_object(j, path)) return c;
  r.keys(j, path, {"split_beats", "wb_depth_beats", "budget_beats", "period_cycles", "gbs_on", "wb_on", "tru_on",
                   "joint_budget"});
  c.split_beats = r.u32(j, "split_beats", c.split_beats, path);
  c.wb_depth_beats = r.u32(j, "wb_depth_beats", c.wb_depth_beats, path);
  c.budget_beats = r.u32(j, "budget_beats", c.budget_beats, path);
  c.period_cycles = r.u64(j, "period_cycles", c.period_cycles, path);
  c.gbs_on = r.boolean(j, "gbs_on", c.gbs_on, path);
  c.wb_on = r.boolean(j, "wb_on", c.wb_on, path);
  c.tru_on = r.boolean(j, "tru_on", c.tru_on, path);
  c.joint_budget = r.boolean(j, "joint_budget", c.joint_budget, path);
  if (c.gbs_on && c.split_beats == 0) r.error(path + ".split_beats", "must be >= 1 when gbs_on");
  r.guard(path, [&] { validate(c); });
  return c;
}

PartitionTable parse_partitions(Reader& r, const json& j, const std::string& path) {
  PartitionTable t;
  if (!r.is_object(j, path)) return t;
  for (const auto& [k, v] : j.items()) {
    const std::string p = path + "." + k;
    PartId id = 0;
    try {
      std::size_t used = 0;
      const unsigned long n = std::stoul(k, &used);
      if (used != k.size()) throw std::invalid_argument(k);
      id = static_cast<PartId>(n);
    } catch (const std::exception&) {
      r.error(p, "partition ids must be decimal integers");
      continue;
    }
    if (!r.is_object(v, p)) continue;
    r.keys(v, p, {"base_set", "num_sets"});
    t[id] = Partition{r.u32(v, "base_set", 0, p), r.u32(v, "num_sets", 0, p)};
  }
  return t;
}

void parse_topology(Reader& r, const json& doc, SocConfig& soc) {
  if (!doc.contains("topology")) return;
  const json& j = doc.at("topology");
  const std::string path = "topology";
  if (!r.is_object(j, path)) return;
  r.keys(j, path, {"beat_bytes", "hyperram"});
  soc.beat_bytes = r.u32(j, "beat_bytes", soc.beat_bytes, path);
  if (!is_pow2(soc.beat_bytes)) r.error(path + ".beat_bytes", "must be a power of two");
  if (j.contains("hyperram")) {
    const json& h = j.at("hyperram");
    const std::string hp = path + ".hyperram";
    if (r.is_object(h, hp)) {
      r.keys(h, hp, {"base", "size", "access_latency_cycles", "cycles_per_beat", "channels"});
      soc.hyperram_base = r.u64(h, "base", soc.hyperram_base, hp);
      soc.hyperram_bytes = r.u64(h, "size", soc.hyperram_bytes, hp);
      soc.hyperram.access_latency_cycles = r.u64(h, "access_latency_cycles", soc.hyperram.access_latency_cycles, hp);
      soc.hyperram.cycles_per_beat = r.u64(h, "cycles_per_beat", soc.hyperram.cycles_per_beat, hp);
      soc.hyperram.channels = r.u32(h, "channels", soc.hyperram.channels, hp);
      r.guard(hp, [&] { validate(soc.hyperram); });
      if (soc.hyperram_bytes == 0) r.error(hp + ".size", "must be > 0");
    }
  }
}

void parse_llc(Reader& r, const json& doc, SocConfig& soc) {
  soc.llc.beat_bytes = soc.beat_bytes;
  if (!doc.contains("llc")) {
    soc.llc.partition_table[0] = Partition{0, soc.llc.num_sets()};
    return;
  }
  const json& j = doc.at("llc");
  const std::string path = "llc";
  if (!r.is_object(j, path)) return;
  r.keys(j, path, {"total_bytes", "line_bytes", "ways", "default_part", "partition_table"});
  soc.llc.total_bytes = r.u64(j, "total_bytes", soc.llc.total_bytes, path);
  soc.llc.line_bytes = r.u32(j, "line_bytes", soc.llc.line_bytes, path);
  soc.llc.ways = r.u32(j, "ways", soc.llc.ways, path);
  soc.llc.default_part = r.u32(j, "default_part", soc.llc.default_part, path);
  if (j.contains("partition_table")) {
    soc.llc.partition_table = parse_partitions(r, j.at("partition_table"), path + ".partition_table");
  } else if (soc.llc.ways > 0 && soc.llc.line_bytes > 0) {
    soc.llc.partition_table[soc.llc.default_part] = Partition{0, soc.llc.num_sets()};
  }
  r.guard(path, [&] { validate(soc.llc); });
}

void parse_spm(Reader& r, const json& doc, SocConfig& soc) {
  if (!doc.contains("spm")) {
    soc.spm.alias_windows = {AliasWindow{0x1000'0000, SpmMode::Interleaved, 0}};
    return;
  }
  const json& j = doc.at("spm");
  const std::string path = "spm";
  if (!r.is_object(j, path)) return;
  r.keys(j, path, {"total_bytes", "num_banks", "word_bytes", "ports", "alias_windows"});
  soc.spm.total_bytes = r.u64(j, "total_bytes", soc.spm.total_bytes, path);
  soc.spm.num_banks = r.u32(j, "num_banks", soc.spm.num_banks, path);
  soc.spm.word_bytes = r.u32(j, "word_bytes", soc.spm.word_bytes, path);
  soc.spm.ports = r.u32(j, "ports", soc.spm.ports, path);
  if (j.contains("alias_windows")) {
    const json& w = j.at("alias_windows");
    if (!w.is_array()) {
      r.error(path + ".alias_windows", "expected an array");
    } else {
      for (std::size_t i = 0; i < w.size(); ++i) {
        const std::string wp = path + ".alias_windows[" + std::to_string(i) + "]";
        if (!r.is_object(w[i], wp)) continue;
        r.keys(w[i], wp, {"base", "mode", "port"});
        AliasWindow a;
        a.base = r.u64(w[i], "base", 0, wp);
        const std::string mode = r.str(w[i], "mode", "interleaved", wp);
        if (mode == "interleaved") {
          a.mode = SpmMode::Interleaved;
        } else if (mode == "contiguous") {
          a.mode = SpmMode::Contiguous;
        } else {
          r.error(wp + ".mode", "must be 'interleaved' or 'contiguous'");
        }
        a.port = r.u32(w[i], "port", 0, wp);
        soc.spm.alias_windows.push_back(a);
      }
    }
  }
  r.guard(path, [&] { validate(soc.spm); });
}

std::optional<amr::Mode> parse_mode(Reader& r, const std::string& s, const std::string& path) {
  try {
    return amr::mode_from_string(s);
  } catch (const ConfigError&) {
    r.error(path, "unknown mode '" + s + "' (INDIP, DLM or TLM)");
    return std::nullopt;
  }
}

void parse_amr(Reader& r, const json& doc, Scenario& sc) {
  if (!doc.contains("amr")) return;
  const json& j = doc.at("amr");
  const std::string path = "amr";
  if (!r.is_object(j, path)) return;
  r.keys(j, path, {"mode", "recovery_cycles", "checkpoint_period", "cycles_per_unit", "recovery", "software",
                   "ecc_checkpoints", "restart_cycles", "reconfig_cycles", "faults", "random_faults", "phases"});
  amr::AmrConfig& c = sc.soc.amr;
  if (const auto m = parse_mode(r, r.str(j, "mode", "INDIP", path), path + ".mode")) c.mode = *m;
  c.recovery_cycles = r.u64(j, "recovery_cycles", c.recovery_cycles, path);
  c.checkpoint_period = r.u32(j, "checkpoint_period", c.checkpoint_period, path);
  c.cycles_per_unit = r.u64(j, "cycles_per_unit", c.cycles_per_unit, path);
  const std::string rec = r.str(j, "recovery", "hfr", path);
  if (rec == "hfr") {
    c.recovery = amr::RecoveryKind::Hfr;
  } else if (rec == "software") {
    c.recovery = amr::RecoveryKind::Software;
  } else {
    r.error(path + ".recovery", "must be 'hfr' or 'software'");
  }
  if (j.contains("software")) {
    const json& s = j.at("software");
    const std::string sp = path + ".software";
    if (r.is_object(s, sp)) {
      r.keys(s, sp, {"trap_cycles", "state_words", "mem_access_cycles"});
      c.software.trap_cycles = r.u64(s, "trap_cycles", c.software.trap_cycles, sp);
      c.software.state_words = r.u32(s, "state_words", c.software.state_words, sp);
      c.software.mem_access_cycles = r.u64(s, "mem_access_cycles", c.software.mem_access_cycles, sp);
    }
  }
  c.ecc_checkpoints = r.boolean(j, "ecc_checkpoints", c.ecc_checkpoints, path);
  c.restart_cycles = r.u64(j, "restart_cycles", c.restart_cycles, path);
  if (j.contains("reconfig_cycles")) {
    const json& t = j.at("reconfig_cycles");
    const std::string tp = path + ".reconfig_cycles";
    if (r.is_object(t, tp)) {
      for (const auto& [k, v] : t.items()) {
        const auto arrow = k.find("->");
        if (arrow == std::string::npos) {
          r.error(tp + "." + k, "keys look like 'INDIP->DLM'");
          continue;
        }
        const auto from = parse_mode(r, k.substr(0, arrow), tp + "." + k);
        const auto to = parse_mode(r, k.substr(arrow + 2), tp + "." + k);
        const std::uint64_t cost = r.u64(t, k.c_str(), 0, tp);
        if (from && to) {
          if (*from == *to) {
            r.error(tp + "." + k, "identity switches always cost 0");
          } else {
            c.reconfig_cycles[{*from, *to}] = cost;
          }
        }
      }
    }
  }
  r.guard(path, [&] { amr::validate(c); });

  auto parse_target = [&](const json& f, const std::string& fp) {
    const std::string t = r.str(f, "target", "commit", fp);
    if (t == "commit") return amr::FaultTarget::CommitValue;
    if (t == "checkpoint") return amr::FaultTarget::Checkpoint;
    r.error(fp + ".target", "must be 'commit' or 'checkpoint'");
    return amr::FaultTarget::CommitValue;
  };

  if (j.contains("faults")) {
    const json& fs = j.at("faults");
    if (!fs.is_array()) {
      r.error(path + ".faults", "expected an array");
    } else {
      for (std::size_t i = 0; i < fs.size(); ++i) {
        const std::string fp = path + ".faults[" + std::to_string(i) + "]";
        if (!r.is_object(fs[i], fp)) continue;
        r.keys(fs[i], fp, {"core", "cycle", "mask", "target"});
        amr::FaultEvent f;
        f.core_id = r.u32(fs[i], "core", 0, fp);
        f.cycle = r.u64(fs[i], "cycle", 0, fp);
        f.mask = r.u64(fs[i], "mask", 1, fp);
        f.target = parse_target(fs[i], fp);
        if (f.core_id >= amr::kNumCores) r.error(fp + ".core", "core ids are 0..11");
        if (f.mask == 0) r.error(fp + ".mask", "a zero mask changes nothing");
        sc.soc.faults.push_back(f);
      }
    }
  }
  if (j.contains("random_faults")) {
    const json& rf = j.at("random_faults");
    const std::string rp = path + ".random_faults";
    if (r.is_object(rf, rp)) {
      r.keys(rf, rp, {"count", "first_cycle", "last_cycle", "target"});
      const std::uint64_t count = r.u64(rf, "count", 0, rp);
      const Cycle lo = r.u64(rf, "first_cycle", 0, rp);
      const Cycle hi = r.u64(rf, "last_cycle", lo, rp);
      const auto target = parse_target(rf, rp);
      if (hi < lo) r.error(rp, "last_cycle < first_cycle");
      std::mt19937_64 rng(sc.seed);
      for (std::uint64_t i = 0; i < count && hi >= lo; ++i) {
        amr::FaultEvent f;
        f.core_id = static_cast<std::uint32_t>(draw_below(rng, amr::kNumCores));
        f.cycle = draw_between(rng, lo, hi);
        f.mask = std::uint64_t{1} << draw_below(rng, 64);
        f.target = target;
        sc.soc.faults.push_back(f);
      }
    }
  }
  if (j.contains("phases")) {
    const json& ps = j.at("phases");
    if (!ps.is_array()) {
      r.error(path + ".phases", "expected an array");
    } else {
      for (std::size_t i = 0; i < ps.size(); ++i) {
        const std::string pp = path + ".phases[" + std::to_string(i) + "]";
        if (!r.is_object(ps[i], pp)) continue;
        r.keys(ps[i], pp, {"mode", "work_units"});
        amr::Phase ph{c.mode, r.u64(ps[i], "work_units", 0, pp)};
        if (const auto m = parse_mode(r, r.str(ps[i], "mode", amr::to_string(c.mode), pp), pp + ".mode")) ph.mode = *m;
        sc.amr_phases.push_back(ph);
      }
    }
  }
}

void parse_tasks(Reader& r, const json& doc, Scenario& sc) {
  if (!doc.contains("tasks")) {
    r.error("tasks", "at least one task is required");
    return;
  }
  const json& ts = doc.at("tasks");
  if (!ts.is_array() || ts.empty()) {
    r.error("tasks", "expected a non-empty array");
    return;
  }
  std::set<std::string> names;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    std::string path = "tasks[" + std::to_string(i) + "]";
    const json& t = ts[i];
    if (!r.is_object(t, path)) continue;
    TaskSpec s;
    s.name = r.str(t, "name", "task" + std::to_string(i), path);
    path = "tasks[" + s.name + "]";
    if (!names.insert(s.name).second) r.error(path, "duplicate task name");
    try {
      s.kind = task_kind_from_string(r.str(t, "kind", "", path));
    } catch (const ConfigError&) {
      r.error(path + ".kind", "must be stride_reader, dma_linear or double_buffered");
      continue;
    }
    switch (s.kind) {
      case TaskKind::StrideReader:
        r.keys(t, path, {"name", "kind", "criticality", "part_id", "start", "write_data_interval", "base", "stride",
                         "count", "passes", "gap_cycles"});
        break;
      case TaskKind::DmaLinear:
        r.keys(t, path, {"name", "kind", "criticality", "part_id", "start", "write_data_interval", "src", "dst",
                         "bytes", "burst_beats", "outstanding", "loop"});
        break;
      case TaskKind::DoubleBufferedAccel:
        r.keys(t, path, {"name", "kind", "criticality", "part_id", "start", "write_data_interval", "base",
                         "tile_bytes", "num_tiles", "burst_beats", "compute_cycles_per_tile", "amr_compute",
                         "units_per_tile"});
        break;
    }
    const std::string crit = r.str(t, "criticality", "non-critical", path);
    if (crit == "critical") {
      s.criticality = Criticality::Critical;
    } else if (crit != "non-critical") {
      r.error(path + ".criticality", "must be 'critical' or 'non-critical'");
    }
    s.part_id = r.u32(t, "part_id", sc.soc.llc.default_part, path);
    s.start = r.u64(t, "start", 0, path);
    s.beat_bytes = sc.soc.beat_bytes;
    s.write_data_interval = r.u64(t, "write_data_interval", 1, path);
    s.base = r.u64(t, "base", 0, path);
    s.stride = r.u64(t, "stride", s.stride, path);
    s.count = r.u64(t, "count", 0, path);
    s.passes = r.u32(t, "passes", 1, path);
    s.gap_cycles = r.u64(t, "gap_cycles", 0, path);
    s.src = r.u64(t, "src", 0, path);
    s.dst = r.u64(t, "dst", 0, path);
    s.bytes = r.u64(t, "bytes", 0, path);
    s.burst_beats = r.u32(t, "burst_beats", s.burst_beats, path);
    s.outstanding = r.u32(t, "outstanding", s.outstanding, path);
    s.loop = r.boolean(t, "loop", false, path);
    s.tile_bytes = r.u64(t, "tile_bytes", 0, path);
    s.num_tiles = r.u32(t, "num_tiles", 1, path);
    s.compute_cycles_per_tile = r.u64(t, "compute_cycles_per_tile", 0, path);
    s.amr_compute = r.boolean(t, "amr_compute", false, path);
    s.units_per_tile = r.u64(t, "units_per_tile", 0, path);
    if (s.amr_compute && !doc.contains("amr")) r.error(path + ".amr_compute", "requires an 'amr' section");
    r.guard(path, [&] { validate(s); });

    if (!sc.soc.llc.partition_table.empty() && !sc.soc.llc.partition_table.contains(s.part_id)) {
      r.error(path + ".part_id", "partition " + std::to_string(s.part_id) + " is not in llc.partition_table");
    }
    s.initiator = static_cast<InitiatorId>(sc.tasks.size());
    sc.tasks.push_back(s);
  }
}

void check_footprints(Reader& r, Scenario& sc) {
  RouteTable routes;
  try {
    routes.add(sc.soc.hyperram_base, sc.soc.hyperram_bytes, Route{EndpointKind::Dpllc, 0});
    for (const auto& w : sc.soc.spm.alias_windows) {
      routes.add(w.base, sc.soc.spm.total_bytes, Route{EndpointKind::Dcspm, w.port});
    }
  } catch (const ConfigError& e) {
    r.error("topology", e.what());
    return;
  }
  auto check = [&](const TaskSpec& s, const char* what, Addr base, std::uint64_t bytes) {
    if (bytes == 0) return;
    if (!routes.route_range(base, bytes)) {
      std::ostringstream os;
      os << what << " [0x" << std::hex << base << ", 0x" << base + bytes << ") is not inside one mapped window";
      r.error("tasks[" + s.name + "]", os.str());
    }
  };
  for (const auto& s : sc.tasks) {
    switch (s.kind) {
      case TaskKind::StrideReader:
        if (s.count > 0) check(s, "footprint", s.base, (s.count - 1) * s.stride + s.beat_bytes);
        break;
      case TaskKind::DmaLinear:
        check(s, "source", s.src, s.bytes);
        check(s, "destination", s.dst, s.bytes);
        break;
      case TaskKind::DoubleBufferedAccel:
        check(s, "tiles", s.base, s.tile_bytes * s.num_tiles);
        break;
    }
  }
}

void parse_tsu_section(Reader& r, const json& doc, Scenario& sc) {
  sc.tsu.assign(sc.tasks.size(), TsuConfig{});
  if (!doc.contains("tsu")) return;
  const json& j = doc.at("tsu");
  if (!r.is_object(j, "tsu")) return;
  for (const auto& [k, v] : j.items()) {
    const auto idx = sc.task_index(k);
    if (!idx) {
      r.error("tsu." + k, "no task named '" + k + "'");
      continue;
    }
    sc.tsu[*idx] = parse_tsu(r, v, "tsu." + k);
  }
}

void parse_events(Reader& r, const json& doc, Scenario& sc) {
  if (!doc.contains("events")) return;
  const json& es = doc.at("events");
  if (!es.is_array()) {
    r.error("events", "expected an array");
    return;
  }
  for (std::size_t i = 0; i < es.size(); ++i) {
    const std::string path = "events[" + std::to_string(i) + "]";
    const json& e = es[i];
    if (!r.is_object(e, path)) continue;
    TimedAction a;
    a.cycle = r.u64(e, "cycle", 0, path);
    const std::string action = r.str(e, "action", "", path);
    if (action == "tsu") {
      r.keys(e, path, {"cycle", "action", "task", "config"});
      a.kind = TimedAction::Kind::TsuReconfig;
      const std::string task = r.str(e, "task", "", path);
      const auto idx = sc.task_index(task);
      if (!idx) {
        r.error(path + ".task", "no task named '" + task + "'");
        continue;
      }
      a.initiator = static_cast<InitiatorId>(*idx);
      a.tsu = parse_tsu(r, e.contains("config") ? e.at("config") : json::object(), path + ".config");
    } else if (action == "llc_flush") {
      r.keys(e, path, {"cycle", "action", "part_id"});
      a.kind = TimedAction::Kind::LlcFlush;
      a.part = r.u32(e, "part_id", 0, path);
    } else if (action == "llc_reprogram") {
      r.keys(e, path, {"cycle", "action", "partition_table"});
      a.kind = TimedAction::Kind::LlcReprogram;
      a.table = parse_partitions(r, e.contains("partition_table") ? e.at("partition_table") : json::object(),
                                 path + ".partition_table");
      r.guard(path, [&] { validate_partitions(a.table, sc.soc.llc.num_sets()); });
    } else {
      r.error(path + ".action", "must be 'tsu', 'llc_flush' or 'llc_reprogram'");
      continue;
    }
    sc.actions.push_back(a);
  }
}

Scenario parse_base(Reader& r, const json& doc) {
  Scenario sc;
  sc.document = doc;
  if (!doc.is_object()) {
    r.error("<root>", "expected an object");
    return sc;
  }
  r.keys(doc, "<root>", {"name", "seed", "run_limit", "isolated", "topology", "tsu", "llc", "spm", "amr", "tasks",
                         "variants", "events"});
  sc.name = r.str(doc, "name", "scenario", "<root>");
  if (sc.name.empty() || sc.name.find_first_of("/\\") != std::string::npos) {
    r.error("<root>.name", "must be a non-empty name without path separators");
  }
  sc.seed = r.u64(doc, "seed", sc.seed, "<root>");
  sc.run_limit = r.u64(doc, "run_limit", sc.run_limit, "<root>");
  if (sc.run_limit == 0) r.error("<root>.run_limit", "must be > 0");
  sc.isolated = r.boolean(doc, "isolated", true, "<root>");
  parse_topology(r, doc, sc.soc);
  parse_llc(r, doc, sc.soc);
  parse_spm(r, doc, sc.soc);
  parse_amr(r, doc, sc);
  parse_tasks(r, doc, sc);
  check_footprints(r, sc);
  parse_tsu_section(r, doc, sc);
  parse_events(r, doc, sc);
  return sc;
}

}  // namespace

ScenarioError::ScenarioError(std::vector<std::string> errors)
    : std::runtime_error("invalid scenario:" + join(errors)), errors_(std::move(errors)) {}

std::optional<std::size_t> Scenario::task_index(const std::string& n) const {
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (tasks[i].name == n) return i;
  }
  return std::nullopt;
}

json apply_overrides(json doc, const json& set) {
  if (!set.is_object()) throw ConfigError("variant 'set' must be an object");
  for (const auto& [path, value] : set.items()) {
    json* node = &doc;
    std::size_t pos = 0;
    while (true) {
      const std::size_t dot = path.find('.', pos);
      const std::string seg = path.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
      if (seg.empty()) throw ConfigError("empty segment in override path '" + path + "'");
      json* next = nullptr;
      if (node->is_array()) {
        for (auto& el : *node) {
          if (el.is_object() && el.contains("name") && el["name"] == seg) next = &el;
        }
        if (next == nullptr && std::all_of(seg.begin(), seg.end(), [](char c) { return c >= '0' && c <= '9'; })) {
          const std::size_t idx = std::stoul(seg);
          if (idx < node->size()) next = &(*node)[idx];
        }
        if (next == nullptr) throw ConfigError("override path '" + path + "': no element '" + seg + "'");
      } else {
        if (node->is_null()) *node = json::object();
        if (!node->is_object()) throw ConfigError("override path '" + path + "' descends into a scalar");
        next = &(*node)[seg];
      }
      if (dot == std::string::npos) {
        *next = value;
        break;
      }
      node = next;
      pos = dot + 1;
    }
  }
  return doc;
}

Scenario parse_scenario(const json& doc) {
  Reader r;
  Scenario sc = parse_base(r, doc);

  std::set<std::string> names;
  if (doc.is_object() && doc.contains("variants")) {
    const json& vs = doc.at("variants");
    if (!vs.is_array()) {
      r.error("variants", "expected an array");
    } else {
      for (std::size_t i = 0; i < vs.size(); ++i) {
        std::string path = "variants[" + std::to_string(i) + "]";
        if (!r.is_object(vs[i], path)) continue;
        r.keys(vs[i], path, {"name", "set"});
        VariantSpec v;
        v.name = r.str(vs[i], "name", "", path);
        if (v.name.empty()) r.error(path + ".name", "required");
        if (v.name == "isolated") r.error(path + ".name", "'isolated' is reserved for the reference run");
        if (!v.name.empty() && !names.insert(v.name).second) r.error(path + ".name", "duplicate variant name");
        path = "variants[" + v.name + "]";
        v.set = vs[i].contains("set") ? vs[i].at("set") : json::object();
        if (!v.set.is_object()) {
          r.error(path + ".set", "expected an object of key paths");
          continue;
        }
        if (v.set.contains("variants")) r.error(path + ".set", "variants cannot override 'variants'");
        sc.variants.push_back(v);
      }
    }
  }
  if (!r.errors.empty()) throw ScenarioError(r.errors);

  // Every variant must itself be a valid scenario.
  for (const auto& v : sc.variants) {
    try {
      json d = apply_overrides(doc, v.set);
      d.erase("variants");
      Reader vr;
      (void)parse_base(vr, d);
      for (const auto& e : vr.errors) r.error("variants[" + v.name + "]", e);
    } catch (const ConfigError& e) {
      r.error("variants[" + v.name + "]", e.what());
    }
  }
  if (!r.errors.empty()) throw ScenarioError(r.errors);
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError({path.string() + ": cannot open"});
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ScenarioError({path.string() + ": " + e.what()});
  }
  return parse_scenario(doc);
}

Scenario resolve_variant(const Scenario& base, const VariantSpec& variant) {
  json d = apply_overrides(base.document, variant.set);
  d.erase("variants");
  Reader r;
  Scenario sc = parse_base(r, d);
  if (!r.errors.empty()) throw ScenarioError(r.errors);
  return sc;
}

Scenario solo(const Scenario& base, std::size_t task) {
  Scenario sc = base;
  sc.tasks = {base.tasks.at(task)};
  sc.tasks[0].loop = false;
  sc.tasks[0].initiator = 0;
  sc.tsu = {base.tsu.at(task)};
  sc.actions.clear();
  for (auto a : base.actions) {
    if (a.kind == TimedAction::Kind::TsuReconfig) {
      if (a.initiator != task) continue;
      a.initiator = 0;
    }
    sc.actions.push_back(a);
  }
  sc.amr_phases.clear();
  sc.variants.clear();
  return sc;
}

namespace {

void run_amr_phases(const Scenario& sc, VariantReport& rep) {
  rep.amr_config = sc.soc.amr;
  if (sc.amr_phases.empty()) return;
  rep.amr_phases = amr::run_phases(sc.soc.amr, sc.amr_phases, sc.soc.faults);
  std::size_t k = 0;
  for (const auto& ph : sc.amr_phases) {
    for (std::uint64_t u = 0; u < ph.work_units && k < rep.amr_phases->output.size(); ++u, ++k) {
      if (rep.amr_phases->output[k] != amr::unit_value(u)) ++rep.amr_phase_mismatches;
    }
  }
}

}  // namespace

VariantReport run_variant(const Scenario& sc, const std::string& name) {
  VariantReport rep;
  rep.name = name;
  Soc soc(sc.soc, sc.tasks, sc.tsu, sc.actions);
  rep.run = soc.run(sc.run_limit);
  run_amr_phases(sc, rep);
  return rep;
}

VariantReport run_isolated(const Scenario& sc) {
  VariantReport rep;
  rep.name = "isolated";
  RunResult& m = rep.run;
  for (std::size_t i = 0; i < sc.tasks.size(); ++i) {
    RunResult r = run_variant(solo(sc, i), "isolated").run;
    m.cycles = std::max(m.cycles, r.cycles);
    m.timeout = m.timeout || r.timeout;
    m.specs.push_back(sc.tasks[i]);
    m.tasks.push_back(r.tasks.at(0));
    m.initiators.push_back(r.initiators.at(0));
    m.task_llc_hits.push_back(r.task_llc_hits.at(0));
    m.task_llc_misses.push_back(r.task_llc_misses.at(0));
    for (const auto& [id, c] : r.llc) {
      auto& t = m.llc[id];
      t.hits += c.hits;
      t.misses += c.misses;
      t.evictions += c.evictions;
      t.flushes += c.flushes;
      t.writebacks += c.writebacks;
    }
    if (m.spm_bank_conflicts.size() < r.spm_bank_conflicts.size()) m.spm_bank_conflicts.resize(r.spm_bank_conflicts.size());
    for (std::size_t b = 0; b < r.spm_bank_conflicts.size(); ++b) m.spm_bank_conflicts[b] += r.spm_bank_conflicts[b];
    m.spm_port_stalls += r.spm_port_stalls;
    m.hyperram_accesses += r.hyperram_accesses;
    m.reprogram_violations += r.reprogram_violations;
    m.decode_errors += r.decode_errors;
    if (r.bounds.checked > 0) {
      m.bounds.min_slack = m.bounds.checked == 0 ? r.bounds.min_slack : std::min(m.bounds.min_slack, r.bounds.min_slack);
      m.bounds.checked += r.bounds.checked;
      m.bounds.violations += r.bounds.violations;
      m.bounds.max_latency = std::max(m.bounds.max_latency, r.bounds.max_latency);
      m.bounds.max_bound = std::max(m.bounds.max_bound, r.bounds.max_bound);
    }
    auto& a = m.amr;
    a.compute_phases += r.amr.compute_phases;
    a.faults_injected += r.amr.faults_injected;
    a.faults_effective += r.amr.faults_effective;
    a.detections += r.amr.detections;
    a.recoveries += r.amr.recoveries;
    a.masked += r.amr.masked;
    a.undetected += r.amr.undetected;
    a.unrecoverable += r.amr.unrecoverable;
    a.cluster_restarts += r.amr.cluster_restarts;
    a.output_mismatches += r.amr.output_mismatches;
    a.recovery_cycles += r.amr.recovery_cycles;
    m.events_dispatched += r.events_dispatched;
    for (auto& e : r.events) {
      e.fields["solo"] = sc.tasks[i].name;
      m.events.push_back(std::move(e));
    }
  }
  std::stable_sort(m.events.begin(), m.events.end(),
                   [](const SimEvent& a, const SimEvent& b) { return a.cycle < b.cycle; });
  run_amr_phases(sc, rep);
  return rep;
}

const VariantReport* Experiment::find(const std::string& n) const {
  for (const auto& v : variants) {
    if (v.name == n) return &v;
  }
  return nullptr;
}

bool Experiment::any_timeout() const {
  return std::any_of(variants.begin(), variants.end(), [](const VariantReport& v) { return v.run.timeout; });
}

Experiment run_experiment(const Scenario& input, const ExperimentOptions& opts) {
  Scenario sc = input;
  if (opts.seed && *opts.seed != input.seed) {
    json d = input.document;
    d["seed"] = *opts.seed;
    sc = parse_scenario(d);
  }
  auto wanted = [&](const std::string& n) {
    return opts.only.empty() || std::find(opts.only.begin(), opts.only.end(), n) != opts.only.end();
  };
  for (const auto& n : opts.only) {
    const bool known = n == "isolated" || std::any_of(sc.variants.begin(), sc.variants.end(),
                                                      [&](const VariantSpec& v) { return v.name == n; });
    if (!known) throw ScenarioError({"--variant " + n + ": no such variant in scenario '" + sc.name + "'"});
  }

  std::vector<std::function<VariantReport()>> jobs;
  if (sc.isolated && wanted("isolated")) jobs.emplace_back([&sc] { return run_isolated(sc); });
  for (const auto& v : sc.variants) {
    if (!wanted(v.name)) continue;
    jobs.emplace_back([&sc, v] { return run_variant(resolve_variant(sc, v), v.name); });
  }

  Experiment ex;
  ex.scenario = sc.name;
  ex.seed = sc.seed;
  if (opts.parallel && jobs.size() > 1) {
    std::vector<std::future<VariantReport>> futures;
    for (auto& j : jobs) futures.push_back(std::async(std::launch::async, j));
    for (auto& f : futures) ex.variants.push_back(f.get());
  } else {
    for (auto& j : jobs) ex.variants.push_back(j());
  }
  std::sort(ex.variants.begin(), ex.variants.end(),
            [](const VariantReport& a, const VariantReport& b) { return a.name < b.name; });
  return ex;
}

}  // namespace mcsim
