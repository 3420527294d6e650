#pragma once

// End-to-end commands behind the CLI. Each returns a process exit code:
// 0 ok, 1 verdict failure, 2 config error, 3 hypothesis violation,
// 4 positivity or NaN failure.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "krf/config.hpp"
#include "krf/diagnostics.hpp"
#include "krf/errors.hpp"
#include "krf/proptest.hpp"

namespace krf {

enum ExitCode : int {
  kExitOk = 0,
  kExitVerdict = 1,
  kExitConfig = 2,
  kExitHypothesis = 3,
  kExitNumerical = 4,
};

/// Maps the library's exception types to exit codes. A bare Error (an I/O
/// failure such as an unwritable output directory) counts as a config error.
int exit_code_for(const Error& e);

inline constexpr int kHypothesisPoints = 256;

struct RunOptions {
  bool svg = false;
  std::ostream* log = nullptr;
};

struct RunOutcome {
  int exit_code = kExitOk;
  std::string message;
  HypothesisConstants hypothesis;
  std::vector<DiagnosticsRecord> records;
  std::optional<VerdictReport> verdict;
  std::optional<FlowState> final_state;
};

/// Family construction, hypothesis check, flow, diagnostics and artifacts in
/// config.out. Never throws for the error classes covered by the exit codes.
RunOutcome run_flow(const RunConfig& config, const RunOptions& opts = {});
/// Continues from the latest snapshot in `dir` using the config it carries.
RunOutcome resume_flow(const std::filesystem::path& dir, const RunOptions& opts = {});

std::string csv_text(const std::vector<DiagnosticsRecord>& records);
/// One SVG line chart per CSV column against t.
void write_plots(const std::filesystem::path& dir, const std::vector<DiagnosticsRecord>& records);

struct RefineRow {
  std::string quantity;
  std::vector<double> values;  // one per rung
  double order = 0;            // worst observed order
  bool degenerate = false;     // differences at roundoff level
  bool pass = false;
};

struct RefineReport {
  std::vector<int> grids;
  std::vector<RefineRow> rows;
  int exit_code = kExitOk;
  std::string message;
  std::string to_text() const;
};

/// Ladder N, 2N, ... (rungs >= 3) run to t = min(1, T_end). Observed order
/// of max|phi| on nodes common to all rungs (from successive differences)
/// and of the heat-identity residual (from successive ratios).
RefineReport refine(const RunConfig& base, int rungs = 3, double min_order = 1.8);

struct OracleRow {
  double s = 0;
  double hsc_sup = 0;
  double hsc_inf = 0;
  double rm_norm = 0;
  double fd_delta = 0;  // max entry difference, finite differences vs closed form, over max(1, max |R|)
};

struct OracleReport {
  HypothesisConstants hypothesis;
  std::vector<OracleRow> rows;
  bool analytic = false;
  double kappa_spread = 0;  // max - min of -sup H over the listed s
  std::string to_text() const;
};

OracleReport oracle(const RunConfig& config, const std::vector<double>& s_list);

struct ProptestOutcome {
  ProptestReport report;
  std::vector<std::filesystem::path> replay_files;
  int exit_code = kExitOk;
  std::string text;
};

/// Runs the suites, writes replay files for failures into `replay_dir`.
ProptestOutcome property_tests(const ProptestOptions& opts, const std::filesystem::path& replay_dir);

}  // namespace krf
