#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "ava/isa.hpp"
#include "ava/mapping.hpp"
#include "ava/memory.hpp"
#include "ava/rename.hpp"
#include "ava/vrf.hpp"

namespace ava
{

/// Latency / structure sizes of the VPU timing model. Cycles are VPU cycles.
struct TimingConfig
{
  unsigned arith_pipe_depth = 2;
  unsigned l1_latency = 4;
  unsigned l2_latency = 12;
  unsigned mem_bandwidth = 8;        // elements per cycle (512-bit interface)
  /// Extra port cycles per memory instruction (request setup), applied to
  /// swaps and spills as well. Zero by default.
  unsigned mem_request_overhead = 0;
  bool mem_use_l1 = false;           // latency class of ordinary vector memory ops
  bool mvrf_use_l1 = false;          // latency class of swap traffic
  std::size_t arith_queue = 32;
  std::size_t mem_queue = 32;
  std::size_t rob = 64;
  unsigned commit_width = 1;

  unsigned mem_latency() const { return mem_use_l1 ? l1_latency : l2_latency; }
  unsigned mvrf_latency() const { return mvrf_use_l1 ? l1_latency : l2_latency; }
};

struct MachineConfig
{
  VrfConfig vrf;
  TimingConfig timing;
  std::size_t logical = kLogicalRegs;
  std::size_t virtuals = kVirtualRegs;
  int rac_limit = 7;
  /// Skip the Swap-Store of a victim whose M-VRF slot is still current.
  bool elide_clean_swap_stores = true;
  bool check_invariants = false;
  /// Cycles without any pipeline progress before the watchdog fires;
  /// 0 selects queue depth x maximum occupancy.
  std::uint64_t watchdog = 0;
};

/// AVA / NATIVE: 32 logical, 64 VVRs. RG: the register groups shrink all
/// three levels by LMUL.
MachineConfig make_machine_config(Mode mode, std::uint32_t mvl, std::uint32_t lmul = 1);

struct StallCounters
{
  std::uint64_t frl_empty = 0;
  std::uint64_t queue_full = 0;
  std::uint64_t rule1 = 0;
  std::uint64_t rule2 = 0;
  std::uint64_t rac_limit = 0;
  std::uint64_t rob_full = 0;
  std::uint64_t preg_wait = 0;

  bool operator==(const StallCounters&) const = default;
};

struct SimStats
{
  std::uint64_t total_cycles = 0;
  std::uint64_t arith = 0;
  std::uint64_t mem = 0;           // ordinary vector loads/stores
  std::uint64_t swap_load = 0;
  std::uint64_t swap_store = 0;
  std::uint64_t spill_load = 0;
  std::uint64_t spill_store = 0;
  std::uint64_t recoveries = 0;
  std::uint64_t busy_arith = 0;
  std::uint64_t busy_mem = 0;
  std::uint64_t swap_store_elided = 0;
  std::uint64_t swap_elements = 0;  // elements moved by swap ops
  std::uint64_t spill_elements = 0; // elements moved by spill ops
  StallCounters stalls;

  std::uint64_t swaps() const { return swap_load + swap_store; }
  std::uint64_t spills() const { return spill_load + spill_store; }
  std::uint64_t non_swap_instructions() const { return arith + mem + spills(); }
  /// Memory share counting spills and swaps as memory instructions.
  InstructionMix mix() const;
  nlohmann::json to_json() const;

  bool operator==(const SimStats&) const = default;
};

enum class OpKind : std::uint8_t { Arith, Mem, SwapStore, SwapLoad };

/// One entry of the second issue stage (an instruction or a swap).
struct IssueOp
{
  std::uint64_t id = 0;
  OpKind kind = OpKind::Arith;
  std::uint64_t seq = 0;              // instruction (or the instruction that triggered the swap)
  const VecInstr* instr = nullptr;
  Vvr vvr{};                          // swaps: the VVR moved
  std::optional<Vvr> dest_vvr;
  std::uint8_t nsrc = 0;
  Preg src[3] = {};
  std::uint64_t src_gen[3] = {};      // write generation each source must see
  std::optional<Preg> dst;
  std::uint64_t dst_gen = 0;
  std::optional<std::uint64_t> swap_store_token;  // rule 1
  std::uint64_t read_threshold = 0;               // rule 2 (and WAR on reallocated regs)
  std::uint32_t width = 0;
  bool issued = false;
  bool reads_credited = false;
  bool squashed = false;
  std::uint64_t issue_cycle = 0;
  std::uint64_t read_done_cycle = 0;
  std::uint64_t complete_cycle = 0;
};

struct ExecRecord
{
  std::uint64_t op_id;
  OpKind kind;
  std::uint64_t seq;
  std::uint64_t issue_cycle;
  std::uint64_t complete_cycle;
  std::uint64_t occupancy;
};

struct CommitSnapshot
{
  std::vector<Vvr> rat;
  std::deque<Vvr> frl;
  std::vector<bool> valid;
};

/// The VPU: rename, pre-issue (second-level mapping + swap generation),
/// decoupled arithmetic / memory queues, execution, ROB and commit.
///
/// Functional effects are applied at issue; the hazard rules guarantee that
/// every read sees its producer's completed write and that no register is
/// overwritten before its previous owner's readers are done.
class Machine
{
public:
  /// `stream` must outlive the machine.
  Machine(const MachineConfig& cfg, const InstructionStream& stream, std::uint64_t seed);

  void advance_cycle();
  bool done() const;
  /// Cycle until every instruction has committed.
  SimStats run();

  const SimStats& stats() const noexcept { return stats_; }
  const SimMemory& memory() const noexcept { return mem_; }
  const RenameState& rename_state() const noexcept { return rs_; }
  const MapState& map_state() const noexcept { return ms_; }
  const CommitSnapshot& snapshot() const noexcept { return snap_; }
  const PVrf& pvrf() const noexcept { return pvrf_; }
  const MVrf& mvrf() const noexcept { return mvrf_; }
  std::uint64_t cycle() const noexcept { return cycle_; }

  /// Architectural value of a logical register (reads wherever it lives).
  std::vector<Word> logical_value(LogicalReg r) const;

  /// Record every issued op (issue order per queue is checkable from this).
  void record_exec(bool on) { record_exec_ = on; }
  const std::vector<ExecRecord>& exec_records() const noexcept { return records_; }
  /// Line-oriented event trace: `cycle, stage, instr-id, detail`.
  void set_event_trace(std::ostream* os) { trace_ = os; }
  /// Inject a flush after dynamic instruction `k` commits.
  void add_flush(std::uint64_t k) { flush_pending_.insert(k); }

  void check_invariants() const;

private:
  struct RobEntry
  {
    RenamedInstr ri;
    bool preissued = false;
    bool executed = false;
  };

  RobEntry& rob_at(std::uint64_t seq) { return rob_[seq - rob_.front().ri.seq]; }

  void stage_complete();
  void stage_commit();
  void stage_reclaim();
  void stage_issue();
  bool try_issue(std::deque<std::uint64_t>& q, bool arith_unit);
  void execute(IssueOp& op);
  void stage_preissue();
  void stage_rename();
  void begin_recovery(std::uint64_t k);
  void finish_recovery();
  void free_phys(Preg p);
  bool reclaim_allowed(Vvr v) const;
  bool reclaim_pending_for(std::uint64_t seq) const;
  IssueOp& new_op(OpKind kind, std::uint64_t seq);
  void add_read(IssueOp& op, Preg p);
  void set_writer(IssueOp& op, Preg p);
  void event(const char* stage, std::uint64_t id, const std::string& detail);

  MachineConfig cfg_;
  const InstructionStream& stream_;
  SimMemory mem_;
  RenameState rs_;
  MapState ms_;
  PVrf pvrf_;
  MVrf mvrf_;
  CommitSnapshot snap_;
  SimStats stats_;

  std::uint64_t cycle_ = 0;
  std::uint64_t fetch_pos_ = 0;
  std::deque<RobEntry> rob_;
  std::uint64_t preissue_seq_ = 0;
  PreissueProgress progress_;

  std::uint64_t next_op_id_ = 0;
  std::unordered_map<std::uint64_t, IssueOp> ops_;
  std::deque<std::uint64_t> arith_q_;
  std::deque<std::uint64_t> mem_q_;
  std::vector<std::uint64_t> in_flight_;
  std::uint64_t arith_busy_until_ = 0;
  std::uint64_t mem_busy_until_ = 0;
  std::optional<std::uint64_t> arith_active_, mem_active_;

  std::vector<std::uint64_t> reads_registered_;
  std::vector<std::uint64_t> reads_completed_;
  /// Per physical register: writers allocated so far / writers completed.
  /// Writers of one register complete in allocation order.
  std::vector<std::uint64_t> write_gen_;
  std::vector<std::uint64_t> done_gen_;
  std::vector<std::optional<std::uint64_t>> last_swap_store_;
  std::unordered_set<std::uint64_t> open_swap_stores_;

  /// Instruction that turned each VVR into an old destination.
  std::vector<std::optional<std::uint64_t>> superseded_by_;
  /// Youngest renamed reader of each VVR's current value.
  std::vector<std::optional<std::uint64_t>> last_reader_;
  std::set<std::uint64_t> unexecuted_mem_;
  std::set<std::uint64_t> flush_pending_;
  std::vector<Vvr> reclaim_candidates_;
  std::optional<std::uint64_t> recovering_;

  std::uint64_t last_progress_ = 0;
  std::uint64_t watchdog_limit_ = 0;
  bool record_exec_ = false;
  std::vector<ExecRecord> records_;
  std::ostream* trace_ = nullptr;
};

} // namespace ava
