#include "ava/presets.hpp"

#include <fstream>
#include <sstream>

#include "preset_sources.hpp"

namespace ava
{

const std::vector<std::string>& preset_names()
{
  static const std::vector<std::string> names = {"axpy",          "blackscholes", "lavamd",
                                                 "particlefilter", "somier",       "swaptions"};
  return names;
}

std::optional<std::string_view> preset_text(std::string_view name)
{
  for (const auto& p : kPresetSources)
    if (name == p.name)
      return p.text;
  return std::nullopt;
}

Kernel load_kernel(const std::string& file_or_preset)
{
  if (auto t = preset_text(file_or_preset))
    return parse_kernel(*t);
  std::ifstream in(file_or_preset);
  if (!in)
    throw KernelError("'" + file_or_preset + "' is neither a preset nor a readable file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_kernel(ss.str());
}

} // namespace ava
