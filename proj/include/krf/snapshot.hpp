#pragma once

// Self-describing text snapshots for bit-exact resume. Every double is written
// as a hexadecimal float; files are written to a temporary name and renamed.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "krf/config.hpp"
#include "krf/diagnostics.hpp"

namespace krf {

struct Snapshot {
  RunConfig config;
  double t = 0;
  std::uint64_t steps = 0;
  double last_dt = 0;
  Eigen::VectorXd phi;
  std::vector<DiagnosticsRecord> records;  // everything observed up to t
};

std::string encode_snapshot(const Snapshot& snap);
/// Throws ConfigError on malformed input.
Snapshot decode_snapshot(const std::string& text);

void write_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

/// "snapshot_<t>.state" with t in shortest round-trip decimal.
std::string snapshot_name(double t);
void write_snapshot(const std::filesystem::path& dir, const Snapshot& snap);
Snapshot read_snapshot(const std::filesystem::path& path);
/// Snapshot with the largest t in `dir`, if any.
std::optional<std::filesystem::path> latest_snapshot(const std::filesystem::path& dir);

}  // namespace krf
