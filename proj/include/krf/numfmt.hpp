#pragma once

// Text encodings for doubles: shortest round-trip decimal for configs,
// 17 significant digits for CSV, C99-style hexadecimal for snapshots.

#include <cstdint>
#include <string>
#include <string_view>

namespace krf {

std::string shortest(double v);
std::string sig17(double v);
/// "0x1.8p+1", "-0x0p+0"; inf and nan spelled as such.
std::string hex_double(double v);

/// Whole-string parses; throw ConfigError naming `what` on malformed input.
double parse_double(std::string_view text, std::string_view what);
double parse_hex_double(std::string_view text, std::string_view what);
std::uint64_t parse_u64(std::string_view text, std::string_view what);
long long parse_int(std::string_view text, std::string_view what);
bool parse_bool(std::string_view text, std::string_view what);

std::string_view trim(std::string_view s);

}  // namespace krf
