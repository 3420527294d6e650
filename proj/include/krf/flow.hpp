#pragma once

// Method-of-lines integration of the normalized Kahler-Ricci flow written as a
// parabolic complex Monge-Ampere equation for the potential phi:
//
//   d/dt phi = log( (chi(t) + i ddbar phi)^n / omega_0^n ) - phi,
//   chi(t)   = e^{-t} (omega_0 + Ric(omega_0)) - Ric(omega_0).
//
// Radially (s = |z|^2) chi has eigen-parts
//   a_chi = e^{-t} a0 + (1 - e^{-t}) F0',  b_chi = e^{-t} b0 + (1 - e^{-t}) (s F0')',
// and the evolving metric is a = a_chi + phi', b = b_chi + (s phi')'.
// phi lives on s_i = i ds, i = 0..N, ds = s_max / N, with phi(s_N) = 0.

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <functional>
#include <memory>

#include "krf/radial.hpp"

namespace krf {

/// Immutable per-grid tables derived from omega_0; shared by every state of a run.
struct Background {
  Background(const RadialPotential& u0, int intervals, double s_max);

  RadialPotential potential;
  int n;
  int intervals;
  double s_max;
  double ds;
  Eigen::VectorXd s;
  Eigen::VectorXd a0, b0;  // eigen-parts of omega_0
  // F0' and (s F0')'. The bump-free part (eps = 0) is closed form; the bump
  // part F0 - F_smooth is differenced with the flow stencils so that the
  // discrete solution stays as regular as the continuum one.
  Eigen::VectorXd f1, fr;
  std::array<Eigen::VectorXd, 4> u_d;         // u0^(1..4)
  std::array<Eigen::VectorXd, 4> smooth_f_d;  // F_smooth^(1..4)
  Eigen::VectorXd f_offset;                   // F0 - F_smooth
};

struct FlowState {
  std::shared_ptr<const Background> background;
  double t = 0.0;
  double sigma = 0.5;
  std::uint64_t steps = 0;
  double last_dt = 0.0;
  Eigen::VectorXd phi;  // N + 1 nodes, phi(N) = 0

  int n() const { return background->n; }
  int intervals() const { return background->intervals; }
};

/// Metric eigen-parts a, b at nodes 0..N-1.
struct MetricProfile {
  Eigen::VectorXd a;
  Eigen::VectorXd b;
};

struct StepReport {
  double dt = 0.0;
  double cfl_bound = 0.0;
  double max_abs_rhs = 0.0;
  double positivity_margin = 0.0;
};

inline constexpr int kMinIntervals = 16;

FlowState init_flow(const RadialPotential& u0, int intervals, double s_max, double sigma = 0.5);

/// Eigen-parts of chi(t) at node i, from the tables the scheme uses.
RadialPair background_pair(const FlowState& state, int node, double t);

/// First derivative phi' (central; one-sided second order at s = 0) at nodes 0..N-1.
Eigen::VectorXd radial_d1(const Eigen::VectorXd& f, double ds);
/// (s f')' (conservative central; equals f' at s = 0) at nodes 0..N-1.
Eigen::VectorXd radial_d2(const Eigen::VectorXd& f, double ds);

/// Throws PositivityError naming the first node where a or b <= 0.
MetricProfile metric_profile(const FlowState& state);
MetricProfile metric_profile(const FlowState& state, const Eigen::VectorXd& phi, double t);

/// d/dt phi at nodes 0..N (entry N is 0 under the Dirichlet condition).
Eigen::VectorXd rhs(const FlowState& state);

/// sigma ds^2 min_i b_i / max(s_i, ds).
double cfl_dt(const FlowState& state, double sigma);
double cfl_dt(const FlowState& state);

/// One Heun step in place. Leaves the state untouched if it throws.
StepReport advance(FlowState& state, double dt);

/// Value-returning form of advance.
std::pair<FlowState, StepReport> step(const FlowState& state, double dt);

struct Schedule {
  double record_every = 0.1;
};

/// Called at every multiple of record_every and at t_end; return true to stop.
using Observer = std::function<bool(const FlowState&)>;

struct RunResult {
  bool stopped_early = false;
  std::uint64_t observations = 0;
};

/// Advances to t_end with dt = min(CFL, time to next observation). A step that
/// fails positivity is retried once with half the step. Observations happen
/// strictly after the starting time; t_end <= t is a no-op.
RunResult run_until(FlowState& state, double t_end, const Schedule& schedule, const Observer& observer);

}  // namespace krf
