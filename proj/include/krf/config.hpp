#pragma once

// Run configuration: flat key = value lines grouped under [section] headers.
//
//   [geometry]  n, family, c, epsilon, s_c, width, s_max, s_buf
//   [grid]      N, sigma
//   [time]      T_end, record_every, snapshot_every, early_stop
//   [verdict]   einstein_target, min_decay_rate, schwarz_slack
//   [run]       seed, out, force
//
// Keys missing from a file keep their defaults; unknown keys are errors.

#include <cstdint>
#include <filesystem>
#include <string>

#include "krf/diagnostics.hpp"
#include "krf/radial.hpp"

namespace krf {

struct RunConfig {
  int n = 1;
  FamilyParams family{Family::perturbed_model, 2.0, 0.05, 0.3, 0.1, 0.9, 0.6};
  int intervals = 512;
  double sigma = 0.5;
  double t_end = 10.0;
  double record_every = 0.25;
  double snapshot_every = 1.0;  // 0 disables intermediate snapshots
  double early_stop = 1e-6;     // Einstein residual; 0 disables
  double einstein_target = 1e-4;
  double min_decay_rate = 0.8;
  double schwarz_slack = 1e-2;
  std::uint64_t seed = 0;
  std::string out = "krf_out";
  bool force = false;

  bool operator==(const RunConfig&) const = default;
};

/// Throws ConfigError on the first out-of-range field.
void validate(const RunConfig& config);

/// Parses and validates.
RunConfig parse_config(const std::string& text);
RunConfig read_config(const std::filesystem::path& path);
/// Lossless: parse_config(serialize(c)) == c.
std::string serialize(const RunConfig& config);

/// Einstein-normalized model ball, n = 1.
RunConfig fixed_point_config(int n);
/// The perturbed benchmark (c = n + 1, eps = 0.05, s_c = 0.3, w = 0.1) with
/// early stop disabled so the run reaches T_end.
RunConfig benchmark_config(int n, int intervals);

VerdictSettings verdict_settings(const RunConfig& config);

}  // namespace krf
