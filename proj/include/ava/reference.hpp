#pragma once

#include <cstdint>
#include <vector>

#include "ava/isa.hpp"

namespace ava
{

/// Final architectural state of a sequential run.
struct ReferenceResult
{
  std::vector<std::vector<Word>> arrays;   // kernel array order
  std::vector<std::vector<Word>> regs;     // 32 logical registers, mvl words each
};

/// Sequential interpretation of `iterations` passes over the kernel body with
/// one mvl-wide buffer per logical register: no renaming, no timing. Array
/// contents start from the same seeded data as the simulator. Throws
/// KernelError for invalid parameters and SimFault for out-of-bounds accesses.
ReferenceResult reference_execute(const Kernel& k, std::uint32_t vl, std::uint64_t iterations,
                                  std::uint32_t mvl, std::uint64_t seed);

} // namespace ava
