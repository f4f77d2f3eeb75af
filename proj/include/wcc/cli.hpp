#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace wcc {

// `dyadic:2^10..2^20`, `dyadic:1000..1000000` (doubling from the lower end,
// upper end always included), or an explicit list `1000,2000,5000`.
std::vector<std::uint64_t> parse_grid(std::string_view text);

struct ConfigEntry {
  std::string key;
  std::string value;
  std::size_t line;
  std::size_t value_column;
};

// `key = value` lines, `#` comments. Throws ParseError with line and column.
std::vector<ConfigEntry> parse_config(std::string_view text);

// Entry point of the `wcc` tool; args excludes the program name.
// Returns the process exit code: 0 success, 1 failed checks, 2 usage or input errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wcc
