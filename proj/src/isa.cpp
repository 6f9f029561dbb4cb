#include "ava/isa.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

namespace ava
{

namespace
{

struct OpInfo
{
  std::string_view name;
  Opcode op;
};

constexpr OpInfo kOps[] = {
  {"vload", Opcode::VLoad}, {"vstore", Opcode::VStore}, {"vadd", Opcode::VAdd},
  {"vsub", Opcode::VSub},   {"vmul", Opcode::VMul},     {"vfma", Opcode::VFma},
  {"vsetvl", Opcode::VSetVl}, {"vmv", Opcode::VMv},
};

std::string_view trim(std::string_view s)
{
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_ws(std::string_view s)
{
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i])))
      ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])))
      ++j;
    if (j > i)
      out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string_view> split_commas(std::string_view s)
{
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == ',') {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

std::optional<std::uint64_t> parse_uint(std::string_view s)
{
  s = trim(s);
  if (s.empty())
    return std::nullopt;
  int base = 10;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    base = 16;
    s.remove_prefix(2);
  }
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (ec != std::errc() || p != s.data() + s.size())
    return std::nullopt;
  return v;
}

std::uint64_t need_uint(std::string_view s, int line, const char* what)
{
  auto v = parse_uint(s);
  if (!v)
    throw KernelError(std::string("expected ") + what + ", got '" + std::string(s) + "'", line);
  return *v;
}

LogicalReg parse_reg(std::string_view s, int line)
{
  s = trim(s);
  if (s.size() < 2 || s[0] != 'v')
    throw KernelError("expected vector register, got '" + std::string(s) + "'", line);
  auto n = parse_uint(s.substr(1));
  if (!n)
    throw KernelError("bad register '" + std::string(s) + "'", line);
  if (*n >= kLogicalRegs)
    throw KernelError("register index out of range: '" + std::string(s) + "'", line);
  return lreg(*n);
}

MemRef parse_mem(const Kernel& k, std::string_view base, std::optional<std::string_view> stride,
                 int line)
{
  MemRef m;
  std::string_view name = trim(base);
  if (auto plus = name.find('+'); plus != std::string_view::npos) {
    m.offset = static_cast<std::int64_t>(need_uint(name.substr(plus + 1), line, "offset"));
    name = trim(name.substr(0, plus));
  }
  auto a = k.find_array(name);
  if (!a)
    throw KernelError("undeclared array '" + std::string(name) + "'", line);
  m.array = static_cast<std::uint16_t>(*a);
  if (stride) {
    m.stride = static_cast<std::int64_t>(need_uint(*stride, line, "stride"));
    if (m.stride < 1)
      throw KernelError("stride must be >= 1", line);
  }
  return m;
}

void parse_instr(Kernel& k, std::string_view text, int line)
{
  auto sp = text.find_first_of(" \t");
  std::string_view mnem = text.substr(0, sp);
  std::string_view rest = sp == std::string_view::npos ? std::string_view{} : trim(text.substr(sp));

  VecInstr in;
  in.line = line;
  if (mnem.ends_with(".spill")) {
    in.spill = true;
    mnem.remove_suffix(6);
  }
  auto it = std::find_if(std::begin(kOps), std::end(kOps),
                         [&](const OpInfo& o) { return o.name == mnem; });
  if (it == std::end(kOps))
    throw KernelError("unknown mnemonic '" + std::string(text.substr(0, sp)) + "'", line);
  in.op = it->op;
  if (in.spill && !in.is_memory())
    throw KernelError(".spill suffix only applies to vload/vstore", line);

  auto ops = rest.empty() ? std::vector<std::string_view>{} : split_commas(rest);
  auto arity = [&](std::size_t lo, std::size_t hi) {
    if (ops.size() < lo || ops.size() > hi)
      throw KernelError("wrong operand count for " + std::string(mnem), line);
  };

  switch (in.op) {
  case Opcode::VLoad:
  case Opcode::VStore: {
    arity(2, 3);
    LogicalReg r = parse_reg(ops[0], line);
    std::optional<std::string_view> stride;
    if (ops.size() == 3)
      stride = ops[2];
    in.mem = parse_mem(k, ops[1], stride, line);
    bool slot = k.arrays[in.mem.array].spill_slot;
    if (slot != in.spill)
      throw KernelError(in.spill ? "spill access must target a .spill slot"
                                 : "ordinary access may not target a .spill slot",
                        line);
    if (in.op == Opcode::VLoad) {
      in.dest = r;
    } else {
      in.nsrc = 1;
      in.srcs[0] = r;
    }
    break;
  }
  case Opcode::VAdd:
  case Opcode::VSub:
  case Opcode::VMul:
    arity(3, 3);
    in.dest = parse_reg(ops[0], line);
    in.nsrc = 2;
    in.srcs[0] = parse_reg(ops[1], line);
    in.srcs[1] = parse_reg(ops[2], line);
    break;
  case Opcode::VFma:
    arity(4, 4);
    in.dest = parse_reg(ops[0], line);
    in.nsrc = 3;
    for (int i = 0; i < 3; ++i)
      in.srcs[i] = parse_reg(ops[i + 1], line);
    break;
  case Opcode::VMv:
    arity(2, 2);
    in.dest = parse_reg(ops[0], line);
    in.nsrc = 1;
    in.srcs[0] = parse_reg(ops[1], line);
    break;
  case Opcode::VSetVl:
    arity(1, 1);
    if (ops[0] == "$VL") {
      in.setvl = -1;
    } else {
      in.setvl = static_cast<std::int64_t>(need_uint(ops[0], line, "vector length"));
      if (in.setvl == 0)
        throw KernelError("vsetvl of zero", line);
    }
    break;
  }
  k.body.push_back(in);
}

void parse_directive(Kernel& k, const std::vector<std::string_view>& w, int line)
{
  auto d = w[0];
  auto need = [&](std::size_t lo, std::size_t hi) {
    if (w.size() < lo || w.size() > hi)
      throw KernelError("malformed " + std::string(d), line);
  };
  if (d == ".kernel") {
    need(2, 2);
    k.name = std::string(w[1]);
  } else if (d == ".array") {
    need(3, 5);
    if (k.find_array(w[1]))
      throw KernelError("duplicate array '" + std::string(w[1]) + "'", line);
    ArrayDecl a;
    a.name = std::string(w[1]);
    std::string_view sz = w[2];
    if (sz.starts_with("$ELEMS")) {
      a.size_kind = SizeKind::Elems;
      a.size = 1;
      if (sz.size() > 6) {
        if (sz[6] != '*')
          throw KernelError("bad array size '" + std::string(sz) + "'", line);
        a.size = static_cast<std::int64_t>(need_uint(sz.substr(7), line, "size multiplier"));
      }
    } else {
      a.size = static_cast<std::int64_t>(need_uint(sz, line, "array size"));
    }
    if (a.size < 1)
      throw KernelError("array size must be positive", line);
    if (w.size() > 3) {
      if (w.size() != 5 || w[3] != "fill")
        throw KernelError("expected 'fill VALUE'", line);
      a.fill = need_uint(w[4], line, "fill value");
    }
    k.arrays.push_back(std::move(a));
  } else if (d == ".spill") {
    need(2, 3);
    if (k.find_array(w[1]))
      throw KernelError("duplicate array '" + std::string(w[1]) + "'", line);
    ArrayDecl a;
    a.name = std::string(w[1]);
    a.size_kind = SizeKind::Mvl;
    a.size = 1;
    a.spill_slot = true;
    a.fill = w.size() == 3 ? need_uint(w[2], line, "fill value") : 0;
    k.arrays.push_back(std::move(a));
  } else if (d == ".vl") {
    need(2, 2);
    if (w[1] != "$VL") {
      auto v = need_uint(w[1], line, "vector length");
      if (v == 0)
        throw KernelError("vector length must be positive", line);
      k.fixed_vl = static_cast<std::uint32_t>(v);
    }
  } else if (d == ".vlmax") {
    need(2, 2);
    auto v = need_uint(w[1], line, "vector length");
    if (v == 0)
      throw KernelError("vector length must be positive", line);
    k.vl_cap = static_cast<std::uint32_t>(v);
  } else if (d == ".repeat") {
    need(2, 2);
    if (w[1] != "$N") {
      auto n = need_uint(w[1], line, "repeat count");
      if (n < 1)
        throw KernelError("repeat count must be >= 1", line);
      k.default_repeat = n;
    }
  } else if (d == ".init") {
    need(3, 3);
    std::string_view r = w[1];
    if (r.ends_with(','))
      r.remove_suffix(1);
    k.inits.push_back({parse_reg(r, line), need_uint(w[2], line, "init value")});
  } else if (d == ".flush_at") {
    need(2, 2);
    k.flush_at.push_back(need_uint(w[1], line, "instruction index"));
  } else {
    throw KernelError("unknown directive '" + std::string(d) + "'", line);
  }
}

} // namespace

std::string_view opcode_name(Opcode op)
{
  for (const auto& o : kOps)
    if (o.op == op)
      return o.name;
  return "?";
}

std::optional<std::size_t> Kernel::find_array(std::string_view n) const
{
  for (std::size_t i = 0; i < arrays.size(); ++i)
    if (arrays[i].name == n)
      return i;
  return std::nullopt;
}

std::uint32_t Kernel::effective_vl(std::uint32_t requested) const
{
  std::uint32_t v = fixed_vl.value_or(requested);
  if (vl_cap)
    v = std::min(v, *vl_cap);
  return v;
}

Kernel parse_kernel(std::string_view text)
{
  Kernel k;
  bool ended = false;
  int line = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos)
      nl = text.size();
    std::string_view raw = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line;
    if (auto hash = raw.find('#'); hash != std::string_view::npos)
      raw = raw.substr(0, hash);
    raw = trim(raw);
    if (raw.empty())
      continue;
    if (ended)
      throw KernelError("text after .end", line);
    if (raw == ".end") {
      ended = true;
      continue;
    }
    if (raw.front() == '.')
      parse_directive(k, split_ws(raw), line);
    else
      parse_instr(k, raw, line);
  }
  if (k.name.empty())
    throw KernelError("missing .kernel directive");
  if (!ended)
    throw KernelError("missing .end");
  return k;
}

std::string format_kernel(const Kernel& k)
{
  std::ostringstream os;
  os << ".kernel " << k.name << '\n';
  for (const auto& a : k.arrays) {
    if (a.spill_slot) {
      os << ".spill " << a.name;
      if (a.fill && *a.fill != 0)
        os << ' ' << *a.fill;
      os << '\n';
      continue;
    }
    os << ".array " << a.name << ' ';
    if (a.size_kind == SizeKind::Elems) {
      os << "$ELEMS";
      if (a.size != 1)
        os << '*' << a.size;
    } else {
      os << a.size;
    }
    if (a.fill)
      os << " fill " << *a.fill;
    os << '\n';
  }
  if (k.fixed_vl)
    os << ".vl " << *k.fixed_vl << '\n';
  else
    os << ".vl $VL\n";
  if (k.vl_cap)
    os << ".vlmax " << *k.vl_cap << '\n';
  if (k.default_repeat)
    os << ".repeat " << *k.default_repeat << '\n';
  else
    os << ".repeat $N\n";
  for (const auto& r : k.inits)
    os << ".init v" << idx(r.reg) << ' ' << r.value << '\n';
  for (auto f : k.flush_at)
    os << ".flush_at " << f << '\n';
  for (const auto& in : k.body) {
    os << opcode_name(in.op) << (in.spill ? ".spill" : "") << ' ';
    switch (in.op) {
    case Opcode::VLoad:
    case Opcode::VStore: {
      LogicalReg r = in.op == Opcode::VLoad ? *in.dest : in.srcs[0];
      os << 'v' << idx(r) << ", " << k.arrays[in.mem.array].name;
      if (in.mem.offset != 0)
        os << '+' << in.mem.offset;
      if (in.mem.stride != 1)
        os << ", " << in.mem.stride;
      break;
    }
    case Opcode::VSetVl:
      if (in.setvl < 0)
        os << "$VL";
      else
        os << in.setvl;
      break;
    default:
      os << 'v' << idx(*in.dest);
      for (int s = 0; s < in.nsrc; ++s)
        os << ", v" << idx(in.srcs[s]);
    }
    os << '\n';
  }
  os << ".end\n";
  return os.str();
}

InstructionStream expand_trace(const Kernel& kernel, std::uint32_t vl, std::uint64_t iterations,
                               std::uint32_t mvl)
{
  if (iterations < 1)
    throw KernelError("iterations must be >= 1");
  if (mvl == 0)
    throw KernelError("MVL must be positive");
  const std::uint32_t iter_vl = kernel.effective_vl(vl);
  if (iter_vl == 0)
    throw KernelError("vector length must be positive");
  if (iter_vl > mvl)
    throw KernelError("vl " + std::to_string(iter_vl) + " exceeds MVL " + std::to_string(mvl));

  InstructionStream s;
  s.kernel_name = kernel.name;
  s.mvl = mvl;
  s.vl = iter_vl;
  s.iterations = iterations;
  s.inits = kernel.inits;
  s.flush_at = kernel.flush_at;
  for (const auto& a : kernel.arrays) {
    ResolvedArray r{a.name, 0, a.fill, a.spill_slot};
    switch (a.size_kind) {
    case SizeKind::Fixed: r.size = static_cast<std::size_t>(a.size); break;
    case SizeKind::Elems:
      r.size = static_cast<std::size_t>(a.size) * iterations * iter_vl;
      break;
    case SizeKind::Mvl: r.size = mvl; break;
    }
    s.arrays.push_back(std::move(r));
  }

  std::size_t dyn = 0;
  for (const auto& in : kernel.body)
    dyn += in.op == Opcode::VSetVl ? 0 : 1;
  s.instrs.reserve(dyn * iterations);

  for (std::uint64_t it = 0; it < iterations; ++it) {
    std::uint32_t cur = iter_vl;
    for (const auto& tmpl : kernel.body) {
      if (tmpl.op == Opcode::VSetVl) {
        std::uint64_t v = tmpl.setvl < 0 ? iter_vl : static_cast<std::uint64_t>(tmpl.setvl);
        if (v > mvl)
          throw KernelError("vsetvl " + std::to_string(v) + " exceeds MVL " + std::to_string(mvl),
                            tmpl.line);
        cur = static_cast<std::uint32_t>(v);
        continue;
      }
      VecInstr in = tmpl;
      if (in.spill) {
        in.vl = mvl;
        in.mem.offset = 0;
        in.mem.stride = 1;
      } else {
        in.vl = cur;
      }
      if (in.is_memory() && !in.spill) {
        std::int64_t start =
          tmpl.mem.offset + static_cast<std::int64_t>(it * iter_vl) * tmpl.mem.stride;
        std::int64_t last = start + static_cast<std::int64_t>(in.vl - 1) * tmpl.mem.stride;
        const auto& arr = s.arrays[tmpl.mem.array];
        if (last >= static_cast<std::int64_t>(arr.size))
          throw KernelError("array overrun on '" + arr.name + "' at iteration " +
                              std::to_string(it),
                            tmpl.line);
        in.mem.offset = start;
      }
      s.instrs.push_back(in);
    }
  }
  return s;
}

std::string serialize(const InstructionStream& s)
{
  std::ostringstream os;
  os << "# " << s.kernel_name << " mvl=" << s.mvl << " vl=" << s.vl << " iters=" << s.iterations
     << " n=" << s.instrs.size() << '\n';
  for (const auto& in : s.instrs) {
    os << opcode_name(in.op) << (in.spill ? ".spill" : "") << " vl=" << in.vl;
    if (in.dest)
      os << " d=v" << idx(*in.dest);
    for (int i = 0; i < in.nsrc; ++i)
      os << " s=v" << idx(in.srcs[i]);
    if (in.is_memory())
      os << " m=" << s.arrays[in.mem.array].name << '@' << in.mem.offset << '/' << in.mem.stride;
    os << '\n';
  }
  return os.str();
}

InstructionMix make_mix(std::uint64_t memory, std::uint64_t arithmetic)
{
  InstructionMix m{memory, arithmetic, 0.0, 0.0};
  auto total = static_cast<double>(memory + arithmetic);
  if (total > 0) {
    m.memory_pct = 100.0 * static_cast<double>(memory) / total;
    m.arithmetic_pct = 100.0 - m.memory_pct;
  }
  return m;
}

InstructionMix classify(const InstructionStream& s)
{
  if (s.instrs.empty())
    throw std::invalid_argument("classify: empty stream");
  std::uint64_t mem = 0, ar = 0;
  for (const auto& in : s.instrs) {
    if (in.is_memory())
      ++mem;
    else if (in.is_arith())
      ++ar;
  }
  return make_mix(mem, ar);
}

std::vector<LogicalReg> registers_used(const Kernel& k)
{
  bool seen[kLogicalRegs] = {};
  for (const auto& in : k.body) {
    if (in.dest)
      seen[idx(*in.dest)] = true;
    for (int i = 0; i < in.nsrc; ++i)
      seen[idx(in.srcs[i])] = true;
  }
  std::vector<LogicalReg> out;
  for (std::size_t i = 0; i < kLogicalRegs; ++i)
    if (seen[i])
      out.push_back(lreg(i));
  return out;
}

} // namespace ava
