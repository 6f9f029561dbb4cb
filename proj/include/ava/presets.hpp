#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ava/isa.hpp"

namespace ava
{

/// Built-in kernels, in report order: axpy and the five proxy kernels.
const std::vector<std::string>& preset_names();

/// Source text of a built-in kernel.
std::optional<std::string_view> preset_text(std::string_view name);

/// A preset name or a path to a kernel file. Throws KernelError.
Kernel load_kernel(const std::string& file_or_preset);

} // namespace ava
