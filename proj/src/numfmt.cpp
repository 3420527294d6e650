#include "krf/numfmt.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "krf/errors.hpp"

namespace krf {

namespace {

[[noreturn]] void malformed(std::string_view text, std::string_view what) {
  throw ConfigError("malformed value for " + std::string(what) + ": '" + std::string(text) + "'");
}

double special(std::string_view t, bool& ok) {
  ok = true;
  if (t == "inf" || t == "+inf") return HUGE_VAL;
  if (t == "-inf") return -HUGE_VAL;
  if (t == "nan") return std::nan("");
  ok = false;
  return 0;
}

}  // namespace

std::string shortest(double v) {
  std::array<char, 64> buf;
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), r.ptr);
}

std::string sig17(double v) {
  std::array<char, 64> buf;
  const int len = std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return std::string(buf.data(), static_cast<std::size_t>(len));
}

std::string hex_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf;
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), std::abs(v), std::chars_format::hex);
  return (std::signbit(v) ? "-0x" : "0x") + std::string(buf.data(), r.ptr);
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view text, std::string_view what) {
  const std::string_view t = trim(text);
  bool ok;
  const double sp = special(t, ok);
  if (ok) return sp;
  double v = 0;
  const char* begin = t.data();
  if (!t.empty() && t.front() == '+') ++begin;
  const auto r = std::from_chars(begin, t.data() + t.size(), v);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size()) malformed(text, what);
  return v;
}

double parse_hex_double(std::string_view text, std::string_view what) {
  std::string_view t = trim(text);
  bool ok;
  const double sp = special(t, ok);
  if (ok) return sp;
  bool negative = false;
  if (!t.empty() && (t.front() == '-' || t.front() == '+')) {
    negative = t.front() == '-';
    t.remove_prefix(1);
  }
  if (t.size() < 3 || t[0] != '0' || (t[1] != 'x' && t[1] != 'X')) malformed(text, what);
  t.remove_prefix(2);
  double v = 0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v, std::chars_format::hex);
  if (r.ec != std::errc() || r.ptr != t.data() + t.size()) malformed(text, what);
  return negative ? -v : v;
}

std::uint64_t parse_u64(std::string_view text, std::string_view what) {
  const std::string_view t = trim(text);
  std::uint64_t v = 0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size()) malformed(text, what);
  return v;
}

long long parse_int(std::string_view text, std::string_view what) {
  const std::string_view t = trim(text);
  long long v = 0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size()) malformed(text, what);
  return v;
}

bool parse_bool(std::string_view text, std::string_view what) {
  const std::string_view t = trim(text);
  if (t == "true" || t == "1") return true;
  if (t == "false" || t == "0") return false;
  malformed(text, what);
}

}  // namespace krf
