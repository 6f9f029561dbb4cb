#include "ava/reference.hpp"

#include <string>

#include "ava/memory.hpp"

namespace ava
{

ReferenceResult reference_execute(const Kernel& k, std::uint32_t vl, std::uint64_t iterations,
                                  std::uint32_t mvl, std::uint64_t seed)
{
  if (iterations < 1)
    throw KernelError("iterations must be >= 1");
  const std::uint32_t step = k.effective_vl(vl);
  if (step == 0 || step > mvl)
    throw KernelError("vector length " + std::to_string(step) + " outside [1, " +
                      std::to_string(mvl) + "]");

  ReferenceResult st;
  for (std::size_t a = 0; a < k.arrays.size(); ++a) {
    const auto& d = k.arrays[a];
    std::size_t n = d.size_kind == SizeKind::Fixed ? static_cast<std::size_t>(d.size)
                    : d.size_kind == SizeKind::Mvl ? mvl
                                                   : static_cast<std::size_t>(d.size) * iterations * step;
    st.arrays.push_back(initial_array_contents({d.name, n, d.fill, d.spill_slot}, a, seed));
  }
  st.regs.assign(kLogicalRegs, std::vector<Word>(mvl, 0));
  for (const auto& ri : k.inits)
    st.regs.at(idx(ri.reg)).assign(mvl, ri.value);

  auto at = [&](std::size_t a, std::int64_t e) -> Word& {
    auto& arr = st.arrays.at(a);
    if (e < 0 || static_cast<std::size_t>(e) >= arr.size())
      throw SimFault("reference: element " + std::to_string(e) + " outside array '" +
                     k.arrays[a].name + "'");
    return arr[static_cast<std::size_t>(e)];
  };

  for (std::uint64_t it = 0; it < iterations; ++it) {
    std::uint32_t cur = step;
    for (const auto& in : k.body) {
      if (in.op == Opcode::VSetVl) {
        cur = in.setvl < 0 ? step : static_cast<std::uint32_t>(in.setvl);
        if (cur > mvl)
          throw KernelError("vsetvl exceeds MVL", in.line);
        continue;
      }
      const std::uint32_t n = in.spill ? mvl : cur;
      std::vector<Word> result(mvl, 0);
      if (in.op == Opcode::VStore) {
        const auto& src = st.regs[idx(in.srcs[0])];
        for (std::uint32_t e = 0; e < n; ++e) {
          std::int64_t pos = in.spill ? e
                                      : in.mem.offset +
                                          (static_cast<std::int64_t>(it * step) + e) * in.mem.stride;
          at(in.mem.array, pos) = src[e];
        }
        continue;
      }
      for (std::uint32_t e = 0; e < n; ++e) {
        auto s = [&](int i) { return st.regs[idx(in.srcs[i])][e]; };
        switch (in.op) {
        case Opcode::VLoad: {
          std::int64_t pos = in.spill ? e
                                      : in.mem.offset +
                                          (static_cast<std::int64_t>(it * step) + e) * in.mem.stride;
          result[e] = at(in.mem.array, pos);
          break;
        }
        case Opcode::VAdd: result[e] = s(0) + s(1); break;
        case Opcode::VSub: result[e] = s(0) - s(1); break;
        case Opcode::VMul: result[e] = s(0) * s(1); break;
        case Opcode::VFma: result[e] = s(0) * s(1) + s(2); break;
        case Opcode::VMv: result[e] = s(0); break;
        default: break;
        }
      }
      st.regs[idx(*in.dest)] = std::move(result);
    }
  }
  return st;
}

} // namespace ava
