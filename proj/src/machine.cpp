#include "ava/machine.hpp"

#include <algorithm>
#include <ostream>
#include <string>

namespace ava
{

MachineConfig make_machine_config(Mode mode, std::uint32_t mvl, std::uint32_t lmul)
{
  MachineConfig c;
  c.vrf = configure(mvl, mode, lmul);
  if (mode == Mode::Rg) {
    c.logical = kLogicalRegs / c.vrf.lmul;
    c.virtuals = kVirtualRegs / c.vrf.lmul;
  }
  return c;
}

InstructionMix SimStats::mix() const
{
  return make_mix(mem + spills() + swaps(), arith);
}

nlohmann::json SimStats::to_json() const
{
  auto m = mix();
  return {
    {"total_cycles", total_cycles},
    {"arith", arith},
    {"mem", mem},
    {"swap_load", swap_load},
    {"swap_store", swap_store},
    {"spill_load", spill_load},
    {"spill_store", spill_store},
    {"recoveries", recoveries},
    {"busy_arith", busy_arith},
    {"busy_mem", busy_mem},
    {"swap_store_elided", swap_store_elided},
    {"swap_elements", swap_elements},
    {"spill_elements", spill_elements},
    {"memory_pct", m.memory_pct},
    {"arithmetic_pct", m.arithmetic_pct},
    {"stalls",
     {{"frl_empty", stalls.frl_empty},
      {"queue_full", stalls.queue_full},
      {"rule1", stalls.rule1},
      {"rule2", stalls.rule2},
      {"rac_limit", stalls.rac_limit},
      {"rob_full", stalls.rob_full},
      {"preg_wait", stalls.preg_wait}}},
  };
}

namespace
{

std::uint64_t align_up(std::uint64_t v, std::uint64_t a) { return (v + a - 1) / a * a; }

const char* kind_name(OpKind k)
{
  switch (k) {
  case OpKind::Arith: return "arith";
  case OpKind::Mem: return "mem";
  case OpKind::SwapStore: return "swap_store";
  case OpKind::SwapLoad: return "swap_load";
  }
  return "?";
}

/// Logical registers read before being written, in first-use order.
std::vector<LogicalReg> live_ins(const InstructionStream& s, std::size_t logical)
{
  std::vector<bool> seen(logical, false);
  std::vector<LogicalReg> out;
  for (const auto& in : s.instrs) {
    for (std::uint8_t i = 0; i < in.nsrc; ++i) {
      auto r = idx(in.srcs[i]);
      if (r < logical && !seen[r]) {
        seen[r] = true;
        out.push_back(in.srcs[i]);
      }
    }
    if (in.dest && idx(*in.dest) < logical)
      seen[idx(*in.dest)] = true;
  }
  return out;
}

} // namespace

Machine::Machine(const MachineConfig& cfg, const InstructionStream& stream, std::uint64_t seed)
  : cfg_(cfg),
    stream_(stream),
    mem_(stream.arrays, seed),
    rs_(RenameState::initial(cfg.logical, cfg.virtuals, cfg.rac_limit)),
    ms_(MapState::initial(cfg.vrf.pregs, cfg.vrf.mvl, cfg.virtuals)),
    pvrf_(cfg.vrf),
    mvrf_(cfg.virtuals, cfg.vrf.mvl)
{
  if (stream.mvl != cfg.vrf.mvl)
    throw ConfigError("instruction stream was expanded for MVL " + std::to_string(stream.mvl) +
                      ", machine has " + std::to_string(cfg.vrf.mvl));
  for (const auto& in : stream.instrs) {
    for (std::uint8_t i = 0; i < in.nsrc; ++i)
      if (idx(in.srcs[i]) >= cfg.logical)
        throw ConfigError("stream uses v" + std::to_string(idx(in.srcs[i])) + " but only " +
                          std::to_string(cfg.logical) + " logical registers exist");
    if (in.dest && idx(*in.dest) >= cfg.logical)
      throw ConfigError("stream uses v" + std::to_string(idx(*in.dest)) + " but only " +
                        std::to_string(cfg.logical) + " logical registers exist");
  }

  mvrf_.set_base(align_up(mem_.end_address(), 4096) + 4096, mem_);

  const std::size_t pregs = cfg.vrf.pregs;
  reads_registered_.assign(pregs, 0);
  reads_completed_.assign(pregs, 0);
  write_gen_.assign(pregs, 0);
  done_gen_.assign(pregs, 0);
  last_swap_store_.assign(pregs, std::nullopt);
  superseded_by_.assign(cfg.virtuals, std::nullopt);
  last_reader_.assign(cfg.virtuals, std::nullopt);
  for (std::size_t p = 0; p < pregs; ++p)
    pvrf_.mark_free(preg(p), true);

  const std::uint32_t mvl = cfg.vrf.mvl;
  std::vector<Word> init(mvl);
  for (const auto& ri : stream.inits) {
    if (idx(ri.reg) >= cfg.logical)
      throw ConfigError("initialised register out of range");
    std::fill(init.begin(), init.end(), ri.value);
    auto slot = mvrf_.slot(rs_.rat[idx(ri.reg)]);
    std::copy(init.begin(), init.end(), slot.begin());
  }
  ms_.elide_clean_stores = cfg.elide_clean_swap_stores;
  for (auto v : rs_.rat)
    ms_.slot_current[idx(v)] = true;
  for (auto r : live_ins(stream, cfg.logical)) {
    if (ms_.pfrl.empty())
      break;
    Vvr v = rs_.rat[idx(r)];
    Preg p = ms_.pfrl.front();
    ms_.pfrl.pop_front();
    ms_.bind(v, p);
    pvrf_.mark_free(p, false);
    pvrf_.write_register(p, mvrf_.slot(v), mvl);
  }

  snap_.rat = rs_.rat;
  snap_.frl = rs_.frl;
  snap_.valid = rs_.valid;
  for (auto k : stream.flush_at)
    flush_pending_.insert(k);

  const auto& t = cfg.timing;
  std::uint64_t max_occ = t.mem_request_overhead +
                          ceil_div(mvl, std::min<std::size_t>(cfg.vrf.lanes, t.mem_bandwidth)) +
                          std::max({t.l1_latency, t.l2_latency, t.arith_pipe_depth});
  watchdog_limit_ = cfg.watchdog ? cfg.watchdog
                                 : std::max(t.arith_queue, t.mem_queue) * max_occ;
}

bool Machine::done() const
{
  return fetch_pos_ >= stream_.size() && rob_.empty() && !recovering_ && in_flight_.empty() &&
         arith_q_.empty() && mem_q_.empty();
}

SimStats Machine::run()
{
  while (!done())
    advance_cycle();
  stats_.total_cycles = cycle_;
  return stats_;
}

void Machine::event(const char* stage, std::uint64_t id, const std::string& detail)
{
  if (trace_)
    *trace_ << cycle_ << ',' << stage << ',' << id << ',' << detail << '\n';
}

void Machine::advance_cycle()
{
  std::uint64_t before = last_progress_;
  stage_complete();
  stage_commit();
  if (recovering_ && in_flight_.empty() && arith_q_.empty() && mem_q_.empty())
    finish_recovery();
  stage_reclaim();
  stage_issue();
  stage_preissue();
  stage_rename();
  if (cfg_.check_invariants)
    check_invariants();
  if (last_progress_ == before && cycle_ - last_progress_ > watchdog_limit_)
    throw InvariantError("deadlock: no pipeline progress for " +
                         std::to_string(cycle_ - last_progress_) + " cycles at cycle " +
                         std::to_string(cycle_));
  ++cycle_;
  stats_.total_cycles = cycle_;
}

void Machine::stage_complete()
{
  auto it = in_flight_.begin();
  while (it != in_flight_.end()) {
    IssueOp& op = ops_.at(*it);
    if (!op.reads_credited && op.read_done_cycle <= cycle_) {
      for (std::uint8_t i = 0; i < op.nsrc; ++i)
        ++reads_completed_[idx(op.src[i])];
      op.reads_credited = true;
    }
    if (op.complete_cycle > cycle_) {
      ++it;
      continue;
    }
    if (op.dst)
      done_gen_[idx(*op.dst)] = std::max(done_gen_[idx(*op.dst)], op.dst_gen);
    if (op.kind == OpKind::SwapStore)
      open_swap_stores_.erase(op.id);
    if ((op.kind == OpKind::Arith || op.kind == OpKind::Mem) && !op.squashed) {
      rob_at(op.seq).executed = true;
      if (op.dest_vvr)
        rs_.valid[idx(*op.dest_vvr)] = true;
      unexecuted_mem_.erase(op.seq);
    }
    event("complete", op.seq, kind_name(op.kind));
    last_progress_ = cycle_;
    ops_.erase(op.id);
    it = in_flight_.erase(it);
  }
}

void Machine::free_phys(Preg p)
{
  ms_.pfrl.push_back(p);
  pvrf_.mark_free(p, true);
}

void Machine::stage_commit()
{
  if (recovering_)
    return;
  for (unsigned w = 0; w < cfg_.timing.commit_width; ++w) {
    if (rob_.empty() || !rob_.front().executed)
      return;
    const RenamedInstr ri = rob_.front().ri;
    auto rel = commit_release(ri, rs_);
    if (rel.freed) {
      if (ms_.resident(*rel.freed))
        free_phys(ms_.unbind(*rel.freed));
      superseded_by_[idx(*rel.freed)].reset();
    }
    if (ri.dest_vvr) {
      check_invariant(!snap_.frl.empty() && snap_.frl.front() == *ri.dest_vvr,
                      "commit snapshot FRL out of order");
      snap_.frl.pop_front();
      snap_.rat[idx(*ri.base.dest)] = *ri.dest_vvr;
      snap_.valid[idx(*ri.dest_vvr)] = true;
      if (ri.old_dest_vvr)
        snap_.frl.push_back(*ri.old_dest_vvr);
    }
    mem_.retire_through(ri.seq);

    const auto& in = ri.base;
    if (in.is_memory()) {
      if (in.spill) {
        ++(in.op == Opcode::VLoad ? stats_.spill_load : stats_.spill_store);
        stats_.spill_elements += in.vl;
      } else {
        ++stats_.mem;
      }
    } else {
      ++stats_.arith;
    }
    event("commit", ri.seq, std::string(opcode_name(in.op)));
    last_progress_ = cycle_;
    rob_.pop_front();
    if (flush_pending_.erase(ri.seq)) {
      begin_recovery(ri.seq);
      return;
    }
  }
}

void Machine::begin_recovery(std::uint64_t k)
{
  recovering_ = k;
  event("flush", k, "squash younger");
  auto squash_queue = [&](std::deque<std::uint64_t>& q) {
    std::deque<std::uint64_t> keep;
    for (auto id : q) {
      IssueOp& op = ops_.at(id);
      if (op.kind == OpKind::SwapStore || op.kind == OpKind::SwapLoad) {
        keep.push_back(id);
        continue;
      }
      for (std::uint8_t i = 0; i < op.nsrc; ++i)
        ++reads_completed_[idx(op.src[i])];
      if (op.dst)
        done_gen_[idx(*op.dst)] = std::max(done_gen_[idx(*op.dst)], op.dst_gen);
      ops_.erase(id);
    }
    q.swap(keep);
  };
  squash_queue(arith_q_);
  squash_queue(mem_q_);
  for (auto id : in_flight_)
    ops_.at(id).squashed = true;
  rob_.clear();
  unexecuted_mem_.clear();
  progress_ = {};
}

void Machine::finish_recovery()
{
  const std::uint64_t k = *recovering_;
  mem_.rollback_after(k);
  rs_.rat = snap_.rat;
  rs_.frl = snap_.frl;
  rs_.valid = snap_.valid;
  for (auto v : rs_.frl) {
    if (ms_.resident(v))
      free_phys(ms_.unbind(v));
    rs_.rac[idx(v)] = 0;
    rs_.rac_trusted[idx(v)] = true;
  }
  for (auto v : rs_.rat)
    rs_.rac_trusted[idx(v)] = false;
  std::fill(superseded_by_.begin(), superseded_by_.end(), std::nullopt);
  std::fill(last_reader_.begin(), last_reader_.end(), std::nullopt);
  for (std::size_t p = 0; p < ms_.pregs; ++p) {
    check_invariant(reads_registered_[p] == reads_completed_[p],
                    "recovery: outstanding register reads after drain");
    check_invariant(done_gen_[p] == write_gen_[p] || !ms_.owner[p],
                    "recovery: pending register write after drain");
  }
  rs_.next_rename_seq = rs_.next_commit_seq = k + 1;
  fetch_pos_ = k + 1;
  preissue_seq_ = k + 1;
  progress_ = {};
  recovering_.reset();
  ++stats_.recoveries;
  event("recover", k, "restored commit snapshot");
  last_progress_ = cycle_;
}

bool Machine::reclaim_allowed(Vvr v) const
{
  auto j = superseded_by_[idx(v)];
  if (!j)
    return true;
  if (!unexecuted_mem_.empty() && *unexecuted_mem_.begin() <= *j)
    return false;
  if (!flush_pending_.empty() && *flush_pending_.begin() < *j)
    return false;
  return true;
}

bool Machine::reclaim_pending_for(std::uint64_t seq) const
{
  // A superseded resident whose readers have all passed pre-issue frees its
  // register without help from `seq` or anything younger, unless a memory
  // instruction or flush point between `seq` and its superseder holds it.
  for (std::size_t i = 0; i < ms_.virtuals; ++i) {
    auto j = superseded_by_[i];
    if (!ms_.vrlt[i] || !j)
      continue;
    if (last_reader_[i] && *last_reader_[i] >= seq)
      continue;
    if (*j < seq)
      return true;
    // Counters left stale by a recovery never reach zero; such a value is
    // freed only when its superseder commits, which needs `seq` first.
    if (!rs_.rac_trusted[i])
      continue;
    auto m = unexecuted_mem_.lower_bound(seq);
    if (m != unexecuted_mem_.end() && *m <= *j)
      continue;
    auto f = flush_pending_.lower_bound(seq);
    if (f != flush_pending_.end() && *f < *j)
      continue;
    return true;
  }
  return false;
}

void Machine::stage_reclaim()
{
  if (recovering_)
    return;
  auto freed = reclaim(ms_, rs_, [this](Vvr v) { return reclaim_allowed(v); });
  for (auto p : freed) {
    pvrf_.mark_free(p, true);
    event("reclaim", idx(p), "physical register freed");
    last_progress_ = cycle_;
  }
}

void Machine::stage_issue()
{
  try_issue(arith_q_, true);
  try_issue(mem_q_, false);
}

bool Machine::try_issue(std::deque<std::uint64_t>& q, bool arith_unit)
{
  if (q.empty())
    return false;
  std::uint64_t& busy_until = arith_unit ? arith_busy_until_ : mem_busy_until_;
  if (busy_until > cycle_)
    return false;
  IssueOp& op = ops_.at(q.front());
  for (std::uint8_t i = 0; i < op.nsrc; ++i)
    if (done_gen_[idx(op.src[i])] < op.src_gen[i])
      return false;
  if (op.dst) {
    if (op.swap_store_token && open_swap_stores_.count(*op.swap_store_token)) {
      ++stats_.stalls.rule1;
      return false;
    }
    if (reads_completed_[idx(*op.dst)] < op.read_threshold) {
      ++stats_.stalls.rule2;
      return false;
    }
  }

  execute(op);

  const auto& t = cfg_.timing;
  std::uint64_t busy = 0;
  std::uint64_t latency = 0;
  switch (op.kind) {
  case OpKind::Arith:
    busy = access_cycles(op.width, cfg_.vrf.lanes);
    latency = t.arith_pipe_depth;
    break;
  case OpKind::Mem:
    busy = t.mem_request_overhead + ceil_div(op.width, t.mem_bandwidth);
    latency = t.mem_latency();
    break;
  case OpKind::SwapStore:
  case OpKind::SwapLoad:
    busy = t.mem_request_overhead + ceil_div(op.width, t.mem_bandwidth);
    latency = t.mvrf_latency();
    break;
  }
  busy = std::max<std::uint64_t>(busy, 1);
  op.issued = true;
  op.issue_cycle = cycle_;
  op.read_done_cycle = cycle_ + busy;
  op.complete_cycle = cycle_ + busy + latency;
  busy_until = cycle_ + busy;
  (arith_unit ? stats_.busy_arith : stats_.busy_mem) += busy;
  (arith_unit ? arith_active_ : mem_active_) = op.id;
  if (op.kind == OpKind::SwapLoad)
    ++stats_.swap_load;
  if (op.kind == OpKind::SwapStore)
    ++stats_.swap_store;
  if (op.kind == OpKind::SwapLoad || op.kind == OpKind::SwapStore)
    stats_.swap_elements += op.width;
  if (record_exec_)
    records_.push_back({op.id, op.kind, op.seq, op.issue_cycle, op.complete_cycle, busy});
  event("issue", op.seq, kind_name(op.kind));
  in_flight_.push_back(op.id);
  q.pop_front();
  last_progress_ = cycle_;
  return true;
}

void Machine::execute(IssueOp& op)
{
  switch (op.kind) {
  case OpKind::SwapStore:
    swap_store_exec(pvrf_, op.src[0], mvrf_, op.vvr);
    return;
  case OpKind::SwapLoad:
    swap_load_exec(mvrf_, op.vvr, pvrf_, *op.dst);
    return;
  case OpKind::Mem: {
    const VecInstr& in = *op.instr;
    const std::size_t vl = in.vl;
    if (in.op == Opcode::VLoad) {
      std::vector<Word> buf(vl);
      for (std::size_t e = 0; e < vl; ++e)
        buf[e] = mem_.read(in.mem.array, in.mem.offset + static_cast<std::int64_t>(e) * in.mem.stride);
      pvrf_.write_register(*op.dst, buf, vl);
    } else {
      auto src = pvrf_.read_register(op.src[0], vl);
      for (std::size_t e = 0; e < vl; ++e)
        mem_.write(in.mem.array, in.mem.offset + static_cast<std::int64_t>(e) * in.mem.stride,
                   src[e], op.seq);
    }
    return;
  }
  case OpKind::Arith: {
    const VecInstr& in = *op.instr;
    const std::size_t vl = in.vl;
    std::span<const Word> s[3];
    for (std::uint8_t i = 0; i < op.nsrc; ++i)
      s[i] = pvrf_.read_register(op.src[i], vl);
    std::vector<Word> out(vl);
    for (std::size_t e = 0; e < vl; ++e) {
      switch (in.op) {
      case Opcode::VAdd: out[e] = s[0][e] + s[1][e]; break;
      case Opcode::VSub: out[e] = s[0][e] - s[1][e]; break;
      case Opcode::VMul: out[e] = s[0][e] * s[1][e]; break;
      case Opcode::VFma: out[e] = s[0][e] * s[1][e] + s[2][e]; break;
      case Opcode::VMv: out[e] = s[0][e]; break;
      default: throw InvariantError("non-arithmetic opcode in the arithmetic queue");
      }
    }
    pvrf_.write_register(*op.dst, out, vl);
    return;
  }
  }
}

IssueOp& Machine::new_op(OpKind kind, std::uint64_t seq)
{
  std::uint64_t id = next_op_id_++;
  IssueOp& op = ops_[id];
  op.id = id;
  op.kind = kind;
  op.seq = seq;
  return op;
}

void Machine::add_read(IssueOp& op, Preg p)
{
  op.src[op.nsrc] = p;
  op.src_gen[op.nsrc] = write_gen_[idx(p)];
  ++op.nsrc;
  ++reads_registered_[idx(p)];
}

void Machine::set_writer(IssueOp& op, Preg p)
{
  op.dst = p;
  op.dst_gen = ++write_gen_[idx(p)];
  op.read_threshold = reads_registered_[idx(p)];
  auto tok = last_swap_store_[idx(p)];
  if (tok && open_swap_stores_.count(*tok))
    op.swap_store_token = tok;
  pvrf_.mark_free(p, false);
}

void Machine::stage_preissue()
{
  if (recovering_ || preissue_seq_ >= rs_.next_rename_seq)
    return;
  RobEntry& e = rob_at(preissue_seq_);
  const RenamedInstr& ri = e.ri;
  const bool is_mem = ri.base.is_memory();
  const auto& t = cfg_.timing;
  auto& own_q = is_mem ? mem_q_ : arith_q_;
  if (own_q.size() >= (is_mem ? t.mem_queue : t.arith_queue)) {
    ++stats_.stalls.queue_full;
    return;
  }
  std::size_t budget = t.mem_queue - mem_q_.size() - (is_mem ? 1 : 0);

  MapPolicy policy;
  policy.victim_eligible = [this](Vvr v) { return static_cast<bool>(rs_.valid[idx(v)]); };
  policy.reclaim_pending = [this, &ri] { return reclaim_pending_for(ri.seq); };

  auto emit = [&](const MapStep& step) {
    for (auto v : step.evicted)
      event("preissue", ri.seq, "evict v" + std::to_string(idx(v)));
    for (const auto& sw : step.swaps) {
      if (sw.kind == SwapKind::Store) {
        IssueOp& op = new_op(OpKind::SwapStore, ri.seq);
        op.vvr = sw.vvr;
        op.width = sw.width;
        add_read(op, sw.phys);
        last_swap_store_[idx(sw.phys)] = op.id;
        open_swap_stores_.insert(op.id);
        mem_q_.push_back(op.id);
        event("preissue", ri.seq, "swap_store v" + std::to_string(idx(sw.vvr)) + " p" +
                                      std::to_string(idx(sw.phys)));
      } else {
        IssueOp& op = new_op(OpKind::SwapLoad, ri.seq);
        op.vvr = sw.vvr;
        op.width = sw.width;
        set_writer(op, sw.phys);
        mem_q_.push_back(op.id);
        event("preissue", ri.seq, "swap_load v" + std::to_string(idx(sw.vvr)) + " p" +
                                      std::to_string(idx(sw.phys)));
      }
      last_progress_ = cycle_;
    }
  };
  auto stall = [&](std::size_t left) {
    ++(left < 2 ? stats_.stalls.queue_full : stats_.stalls.preg_wait);
  };

  const auto elided_before = ms_.elided_stores;
  struct ElidedCount
  {
    SimStats& st;
    MapState& ms;
    std::uint64_t before;
    ~ElidedCount() { st.swap_store_elided += ms.elided_stores - before; }
  } count_elided{stats_, ms_, elided_before};
  MapStep s1 = map_sources(ri, progress_, ms_, rs_, budget, policy);
  emit(s1);
  budget -= s1.swaps.size();
  if (!s1.complete) {
    stall(budget);
    return;
  }
  MapStep s2 = allocate_dest(ri, progress_, ms_, rs_, budget, policy);
  emit(s2);
  budget -= s2.swaps.size();
  if (!s2.complete) {
    stall(budget);
    return;
  }

  IssueOp& op = new_op(is_mem ? OpKind::Mem : OpKind::Arith, ri.seq);
  op.instr = &stream_.instrs[ri.seq];
  op.width = ri.base.vl;
  for (std::uint8_t i = 0; i < ri.base.nsrc; ++i)
    add_read(op, progress_.src_phys[i]);
  if (ri.dest_vvr) {
    op.dest_vvr = ri.dest_vvr;
    set_writer(op, *progress_.dest_phys);
  }
  own_q.push_back(op.id);
  e.preissued = true;
  event("preissue", ri.seq, std::string(opcode_name(ri.base.op)));
  ++preissue_seq_;
  progress_ = {};
  last_progress_ = cycle_;
}

void Machine::stage_rename()
{
  if (recovering_ || fetch_pos_ >= stream_.size())
    return;
  if (rob_.size() >= cfg_.timing.rob) {
    ++stats_.stalls.rob_full;
    return;
  }
  auto out = rename(stream_.instrs[fetch_pos_], rs_);
  if (out.stall == RenameStall::FrlEmpty) {
    ++stats_.stalls.frl_empty;
    return;
  }
  if (out.stall == RenameStall::RacLimit) {
    ++stats_.stalls.rac_limit;
    return;
  }
  RenamedInstr& ri = *out.instr;
  check_invariant(ri.seq == fetch_pos_, "rename sequence out of step with the stream");
  for (std::uint8_t i = 0; i < ri.base.nsrc; ++i)
    last_reader_[idx(ri.src_vvrs[i])] = ri.seq;
  if (ri.old_dest_vvr)
    superseded_by_[idx(*ri.old_dest_vvr)] = ri.seq;
  if (ri.dest_vvr) {
    ms_.slot_current[idx(*ri.dest_vvr)] = false;
    superseded_by_[idx(*ri.dest_vvr)].reset();
    last_reader_[idx(*ri.dest_vvr)].reset();
  }
  if (ri.base.is_memory())
    unexecuted_mem_.insert(ri.seq);
  if (trace_) {
    std::string d(opcode_name(ri.base.op));
    if (ri.dest_vvr)
      d += " d=v" + std::to_string(idx(*ri.dest_vvr));
    for (std::uint8_t i = 0; i < ri.base.nsrc; ++i)
      d += (i ? " v" : " s=v") + std::to_string(idx(ri.src_vvrs[i]));
    event("rename", ri.seq, d);
  }
  rob_.push_back({std::move(ri), false, false});
  ++fetch_pos_;
  last_progress_ = cycle_;
}

std::vector<Word> Machine::logical_value(LogicalReg r) const
{
  Vvr v = rs_.rat.at(idx(r));
  std::span<const Word> s = ms_.resident(v) ? pvrf_.read_register(ms_.prmt[idx(v)], ms_.mvl)
                                            : mvrf_.slot(v);
  return {s.begin(), s.end()};
}

void Machine::check_invariants() const
{
  ms_.check_partition();
  std::vector<bool> in_rat(cfg_.virtuals, false);
  for (auto v : rs_.rat) {
    check_invariant(!in_rat[idx(v)], "RAT maps two logical registers to one VVR");
    in_rat[idx(v)] = true;
    if (rs_.rac_trusted[idx(v)])
      check_invariant(rs_.rac[idx(v)] >= 1, "mapped VVR with a zero reference count");
  }
  for (auto v : rs_.frl) {
    check_invariant(!in_rat[idx(v)], "VVR both mapped and free");
    check_invariant(rs_.rac[idx(v)] == 0, "free VVR with a nonzero reference count");
    check_invariant(!ms_.resident(v), "free VVR still holds a physical register");
  }
  if (!recovering_) {
    auto in_flight_dests = std::count_if(rob_.begin(), rob_.end(),
                                         [](const RobEntry& e) { return e.ri.dest_vvr.has_value(); });
    check_invariant(rs_.rat.size() + rs_.frl.size() + static_cast<std::size_t>(in_flight_dests) ==
                        cfg_.virtuals,
                    "VVRs leaked");
  }
  for (std::size_t p = 0; p < ms_.pregs; ++p) {
    bool listed = std::find(ms_.pfrl.begin(), ms_.pfrl.end(), preg(p)) != ms_.pfrl.end();
    check_invariant(listed == pvrf_.is_free(preg(p)), "P-VRF free flags disagree with the PFRL");
    check_invariant(reads_completed_[p] <= reads_registered_[p], "more reads completed than issued");
  }
  auto port_check = [&](const std::optional<std::uint64_t>& id, std::uint64_t busy_until,
                        unsigned max_reads) {
    if (!id || busy_until <= cycle_)
      return;
    auto it = ops_.find(*id);
    if (it == ops_.end())
      return;
    check_invariant(it->second.nsrc <= max_reads, "register file read port budget exceeded");
  };
  port_check(arith_active_, arith_busy_until_, 3);
  port_check(mem_active_, mem_busy_until_, 1);
  check_invariant(stats_.busy_arith <= cycle_ + cfg_.vrf.mvl &&
                      stats_.busy_mem <= cycle_ + cfg_.timing.mem_request_overhead + cfg_.vrf.mvl,
                  "functional unit busier than wall-clock time");
}

} // namespace ava
