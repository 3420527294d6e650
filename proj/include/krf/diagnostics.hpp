#pragma once

// Monitored quantities along the flow and the verdict that compares them with
// the a-priori bounds: the Schwarz trace bound, e^{-t} decay of phidot,
// uniform equivalence with omega_0, convergence to Kahler-Einstein, and
// bounded curvature.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "krf/flow.hpp"

namespace krf {

struct DiagnosticsRecord {
  double t = 0;
  double sup_S = 0;
  double schwarz_threshold = 0;
  double sup_phidot = 0;
  double einstein_residual = 0;
  double lambda_ratio_min = 0;
  double lambda_ratio_max = 0;
  double christoffel_diff = 0;
  double boundary_influence = 0;
  double heat_identity_residual = 0;
  double dt = 0;
  // Not part of the CSV schema.
  double sup_phi = 0;
  double volume_ratio_max = 0;
  double curvature_sup = 0;

  double equivalence_constant() const { return std::max(lambda_ratio_max, 1.0 / lambda_ratio_min); }
  /// max eigen-ratio allowed by prod(lambda) <= V and 1/lambda_i <= S.
  double sandwich_bound(int n) const { return volume_ratio_max * std::pow(sup_S, n - 1); }
};

/// Frozen CSV header.
inline constexpr const char* kCsvHeader =
    "t,sup_S,schwarz_threshold,sup_phidot,einstein_residual,lambda_ratio_min,lambda_ratio_max,"
    "christoffel_diff,boundary_influence,heat_identity_residual,dt";

std::string to_csv_row(const DiagnosticsRecord& r);

/// max(n, 2n / ((n + 1) kappa)); infinite when kappa <= 0.
double schwarz_threshold(int n, double kappa);

struct TraceProfile {
  Eigen::VectorXd values;
  double sup = 0;
};

/// S = tr_{omega(t)} omega_0 = (n-1) a0/a + b0/b at nodes 0..N-1.
TraceProfile trace_S(const FlowState& state);

struct DecayFit {
  double rate = 0;
  double amplitude = 0;
  bool exact_zero = false;
  int points = 0;
};

/// Least squares of log(y) - log(t) = log(A) - r t.
DecayFit fit_decay_rate(std::span<const double> t, std::span<const double> y);
/// Fit of sup|phidot| over records with t in [t1, t2].
DecayFit phidot_decay_fit(std::span<const DiagnosticsRecord> records, double t1, double t2);

/// sup over nodes 0..N-1 of max(|F' - a|/a, |(sF')' - b|/b), F = log det g(t).
double einstein_residual(const FlowState& state);

struct EquivalenceRatios {
  double min = 1;
  double max = 1;
};

/// Extremes of a/a0 and b/b0 over nodes 0..N-1.
EquivalenceRatios equivalence_ratios(const FlowState& state);

/// sup_i |d/dt(e^t phidot) - Laplacian(e^t phidot) + tr_{omega(t)}(omega_0 + Ric(omega_0))|
/// at the middle state, d/dt by central difference; requires uniform spacing.
double heat_identity_residual(const FlowState& prev, const FlowState& mid, const FlowState& next);

/// Two extra Heun steps of size cfl_dt from `state` on a copy, then the
/// residual at the middle step.
double heat_identity_probe(const FlowState& state);

/// Potential jet of omega(t): closed-form background plus local quintic fits of phi.
PotentialJet evolving_jet(const FlowState& state, int node);

/// sup over nodes of |Gamma(g(t)) - Gamma(g_ref)|^2_{g(t)}.
double christoffel_diff(const FlowState& state, const FlowState& reference);

/// max |phi| over the outer 10% of nodes.
double boundary_influence(const FlowState& state);

/// sup over nodes of |Rm(omega(t))|.
double curvature_sup(const FlowState& state);

/// Computes a full DiagnosticsRecord per snapshot.
class Monitor {
 public:
  Monitor(FlowState reference, double kappa_est);

  DiagnosticsRecord record(const FlowState& state) const;

 private:
  FlowState reference_;
  double kappa_;
};

/// sup|phidot| at or below this everywhere counts as a stationary run: the
/// decay fit is skipped and reported as exact zero.
inline constexpr double kStationaryPhidot = 1e-14;

struct Criterion {
  std::string name;
  bool pass = false;
  double measured = 0;
  double threshold = 0;
};

struct VerdictSettings {
  double schwarz_slack = 1e-2;
  double decay_t1 = 2.0;
  double decay_t2 = 8.0;
  double min_decay_rate = 0.8;
  double einstein_target = 1e-4;
  double curvature_factor = 2.0;
};

struct VerdictReport {
  std::vector<Criterion> criteria;
  bool partial = false;

  bool all_pass() const;
  const Criterion& find(const std::string& name) const;
  /// One `criterion=<name> pass=<bool> measured=<float> threshold=<float>` line each.
  std::string to_text() const;
};

VerdictReport verdict(std::span<const DiagnosticsRecord> records, double kappa_est, double b_est, int n,
                      const VerdictSettings& settings = {});

}  // namespace krf
