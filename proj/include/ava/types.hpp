#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace ava
{

/// Architectural (ISA) vector register, v0..v31.
enum class LogicalReg : std::uint8_t {};
/// Virtual Vector Register: the first-level rename target.
enum class Vvr : std::uint8_t {};
/// Physical register slot in the P-VRF.
enum class Preg : std::uint8_t {};

template <typename E>
constexpr std::size_t idx(E e) noexcept
{
  return static_cast<std::size_t>(e);
}

constexpr LogicalReg lreg(std::size_t i) noexcept { return static_cast<LogicalReg>(i); }
constexpr Vvr vvr(std::size_t i) noexcept { return static_cast<Vvr>(i); }
constexpr Preg preg(std::size_t i) noexcept { return static_cast<Preg>(i); }

/// One vector element is a 64-bit word.
using Word = std::uint64_t;
constexpr std::size_t kWordBytes = 8;

constexpr std::size_t kLogicalRegs = 32;
constexpr std::size_t kVirtualRegs = 64;

/// Malformed kernel text or kernel semantics (carries a line number when known).
class KernelError : public std::runtime_error
{
public:
  KernelError(const std::string& msg, int line = 0)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg),
      line_(line)
  {}
  int line() const noexcept { return line_; }

private:
  int line_;
};

/// Invalid machine or experiment configuration.
class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Functional fault during simulation (e.g. out-of-bounds access).
class SimFault : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Broken microarchitectural invariant. Always a simulator bug.
class InvariantError : public std::logic_error
{
public:
  using std::logic_error::logic_error;
};

inline void check_invariant(bool cond, const char* what)
{
  if (!cond)
    throw InvariantError(what);
}

inline std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

} // namespace ava
