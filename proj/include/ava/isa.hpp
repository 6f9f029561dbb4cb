#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ava/types.hpp"

namespace ava
{

enum class Opcode : std::uint8_t { VLoad, VStore, VAdd, VSub, VMul, VFma, VSetVl, VMv };

std::string_view opcode_name(Opcode op);

/// Memory operand of a VLOAD/VSTORE template.
struct MemRef
{
  std::uint16_t array = 0;   // index into Kernel::arrays
  std::int64_t offset = 0;   // first element, iteration 0
  std::int64_t stride = 1;   // elements
};

/// A vector instruction. In a Kernel body `vl` is zero and resolved at
/// expansion; in an InstructionStream it is concrete.
struct VecInstr
{
  Opcode op = Opcode::VAdd;
  std::optional<LogicalReg> dest;
  std::uint8_t nsrc = 0;
  LogicalReg srcs[3] = {};
  MemRef mem;                // memory ops only
  bool spill = false;        // compiler spill/reload: fixed slot, MVL wide
  std::uint32_t vl = 0;
  std::int64_t setvl = 0;    // VSETVL operand; -1 means $VL
  int line = 0;

  bool is_memory() const noexcept { return op == Opcode::VLoad || op == Opcode::VStore; }
  bool is_arith() const noexcept { return !is_memory() && op != Opcode::VSetVl; }
};

enum class SizeKind : std::uint8_t { Fixed, Elems, Mvl };

struct ArrayDecl
{
  std::string name;
  SizeKind size_kind = SizeKind::Fixed;
  std::int64_t size = 0;        // Fixed: elements; Elems: multiplier of $ELEMS
  std::optional<Word> fill;     // constant fill instead of seeded random data
  bool spill_slot = false;      // declared with .spill
};

struct RegInit
{
  LogicalReg reg;
  Word value;
};

struct Kernel
{
  std::string name;
  std::vector<ArrayDecl> arrays;
  std::optional<std::uint32_t> fixed_vl;   // `.vl N`; absent for `.vl $VL`
  std::optional<std::uint32_t> vl_cap;     // `.vlmax N`
  std::optional<std::uint64_t> default_repeat;
  std::vector<RegInit> inits;
  std::vector<std::uint64_t> flush_at;
  std::vector<VecInstr> body;

  std::optional<std::size_t> find_array(std::string_view n) const;
  /// Effective per-iteration VL for a requested VL.
  std::uint32_t effective_vl(std::uint32_t requested) const;
};

struct ResolvedArray
{
  std::string name;
  std::size_t size = 0;         // elements
  std::optional<Word> fill;
  bool spill_slot = false;
};

struct InstructionStream
{
  std::string kernel_name;
  std::uint32_t mvl = 0;
  std::uint32_t vl = 0;
  std::uint64_t iterations = 0;
  std::vector<ResolvedArray> arrays;
  std::vector<RegInit> inits;
  std::vector<std::uint64_t> flush_at;
  std::vector<VecInstr> instrs;

  std::size_t size() const noexcept { return instrs.size(); }
};

/// Parse the line-oriented kernel format. Throws KernelError.
Kernel parse_kernel(std::string_view text);

/// Render a kernel back to text (round-trips through parse_kernel).
std::string format_kernel(const Kernel& k);

/// Repeat the body `iterations` times, advancing memory offsets by
/// vl*stride per iteration and resolving VSETVL. Throws KernelError.
InstructionStream expand_trace(const Kernel& kernel, std::uint32_t vl,
                               std::uint64_t iterations, std::uint32_t mvl);

/// Line-per-instruction text form of a stream. Deterministic.
std::string serialize(const InstructionStream& s);

struct InstructionMix
{
  std::uint64_t memory = 0;
  std::uint64_t arithmetic = 0;
  double memory_pct = 0.0;
  double arithmetic_pct = 0.0;
};

InstructionMix make_mix(std::uint64_t memory, std::uint64_t arithmetic);

/// Memory vs. arithmetic split. Throws std::invalid_argument on an empty stream.
InstructionMix classify(const InstructionStream& s);

/// Logical registers referenced anywhere in the body.
std::vector<LogicalReg> registers_used(const Kernel& k);

} // namespace ava
