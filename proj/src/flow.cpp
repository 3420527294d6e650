#include "krf/flow.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace krf {

Background::Background(const RadialPotential& u0, int intervals_, double s_max_)
    : potential(u0), n(u0.dim()), intervals(intervals_), s_max(s_max_), ds(s_max_ / intervals_) {
  const int nodes = intervals + 1;
  s.resize(nodes);
  a0.resize(nodes);
  b0.resize(nodes);
  f1.resize(nodes);
  fr.resize(nodes);
  f_offset.resize(nodes);
  for (auto& v : u_d) v.resize(nodes);
  for (auto& v : smooth_f_d) v.resize(nodes);
  FamilyParams smooth_params = u0.params();
  smooth_params.epsilon = 0.0;
  const RadialPotential smooth(n, smooth_params);
  for (int i = 0; i < nodes; ++i) {
    s(i) = i * ds;
    const PotentialJet j = u0.jet(s(i));
    const RadialPair ab = eigen_pair(j);
    const std::array<double, 5> fd = log_det_derivatives(n, j);
    const std::array<double, 5> sd = log_det_derivatives(n, smooth.jet(s(i)));
    a0(i) = ab.tangential;
    b0(i) = ab.radial;
    f_offset(i) = fd[0] - sd[0];
    f1(i) = sd[1];
    fr(i) = sd[1] + s(i) * sd[2];
    for (int k = 0; k < 4; ++k) {
      u_d[k](i) = j[k + 1];
      smooth_f_d[k](i) = sd[k + 1];
    }
  }
  if (!f_offset.isZero(0.0)) {
    f1.head(intervals) += radial_d1(f_offset, ds);
    fr.head(intervals) += radial_d2(f_offset, ds);
  }
}

FlowState init_flow(const RadialPotential& u0, int intervals, double s_max, double sigma) {
  if (intervals < kMinIntervals) throw ConfigError("grid needs at least 16 intervals");
  if (!(s_max > 0.0 && s_max < 1.0)) throw ConfigError("s_max must lie in (0, 1)");
  if (!(sigma > 0.0 && sigma <= 1.0)) throw ConfigError("CFL safety factor must lie in (0, 1]");
  FlowState state;
  state.background = std::make_shared<const Background>(u0, intervals, s_max);
  state.sigma = sigma;
  state.phi = Eigen::VectorXd::Zero(intervals + 1);
  return state;
}

RadialPair background_pair(const FlowState& state, int node, double t) {
  const Background& bg = *state.background;
  if (node < 0 || node > bg.intervals) throw ArgumentError("background_pair: node out of range");
  const double e = std::exp(-t);
  return {e * bg.a0(node) + (1.0 - e) * bg.f1(node), e * bg.b0(node) + (1.0 - e) * bg.fr(node)};
}

Eigen::VectorXd radial_d1(const Eigen::VectorXd& f, double ds) {
  const Eigen::Index n = f.size() - 1;
  Eigen::VectorXd d(n);
  d(0) = (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * ds);
  d.tail(n - 1) = (f.segment(2, n - 1) - f.segment(0, n - 1)) / (2.0 * ds);
  return d;
}

Eigen::VectorXd radial_d2(const Eigen::VectorXd& f, double ds) {
  const Eigen::Index n = f.size() - 1;
  Eigen::VectorXd d(n);
  d(0) = (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * ds);
  // ((i + 1/2)(f_{i+1} - f_i) - (i - 1/2)(f_i - f_{i-1})) / ds
  for (Eigen::Index i = 1; i < n; ++i)
    d(i) = ((i + 0.5) * (f(i + 1) - f(i)) - (i - 0.5) * (f(i) - f(i - 1))) / ds;
  return d;
}

namespace {

void check_positive(const Background& bg, double t, const MetricProfile& m) {
  const Eigen::Index n = m.a.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(m.a(i) > 0.0 && m.b(i) > 0.0)) {
      std::ostringstream os;
      os << "metric left the Kahler cone at node " << i << " (s = " << bg.s(i) << ", t = " << t << ")";
      throw PositivityError(os.str(), i, bg.s(i));
    }
  }
}

Eigen::VectorXd rhs_at(const FlowState& state, const Eigen::VectorXd& phi, double t, MetricProfile* profile_out) {
  const Background& bg = *state.background;
  const int N = bg.intervals;
  MetricProfile m = metric_profile(state, phi, t);
  Eigen::VectorXd out(N + 1);
  auto head = out.head(N).array();
  head = (m.b.array() / bg.b0.head(N).array()).log() - phi.head(N).array();
  if (bg.n > 1) head += (bg.n - 1) * (m.a.array() / bg.a0.head(N).array()).log();
  out(N) = 0.0;
  if (profile_out) *profile_out = std::move(m);
  return out;
}

double cfl_from_profile(const Background& bg, const MetricProfile& m, double sigma) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < bg.intervals; ++i) best = std::min(best, m.b(i) / std::max(bg.s(i), bg.ds));
  return sigma * bg.ds * bg.ds * best;
}

}  // namespace

MetricProfile metric_profile(const FlowState& state, const Eigen::VectorXd& phi, double t) {
  const Background& bg = *state.background;
  const int N = bg.intervals;
  const double e = std::exp(-t);
  MetricProfile m;
  m.a = e * bg.a0.head(N) + (1.0 - e) * bg.f1.head(N) + radial_d1(phi, bg.ds);
  m.b = e * bg.b0.head(N) + (1.0 - e) * bg.fr.head(N) + radial_d2(phi, bg.ds);
  check_positive(bg, t, m);
  return m;
}

MetricProfile metric_profile(const FlowState& state) { return metric_profile(state, state.phi, state.t); }

Eigen::VectorXd rhs(const FlowState& state) { return rhs_at(state, state.phi, state.t, nullptr); }

double cfl_dt(const FlowState& state, double sigma) {
  if (!(sigma > 0.0 && sigma <= 1.0)) throw ArgumentError("CFL safety factor must lie in (0, 1]");
  return cfl_from_profile(*state.background, metric_profile(state), sigma);
}

double cfl_dt(const FlowState& state) { return cfl_dt(state, state.sigma); }

StepReport advance(FlowState& state, double dt) {
  const Background& bg = *state.background;
  const int N = bg.intervals;
  if (!(dt > 0.0)) throw ArgumentError("time step must be positive");

  MetricProfile m0;
  const Eigen::VectorXd k1 = rhs_at(state, state.phi, state.t, &m0);
  StepReport report;
  report.cfl_bound = cfl_from_profile(bg, m0, state.sigma);
  if (dt > report.cfl_bound) throw ArgumentError("time step exceeds the CFL bound");

  Eigen::VectorXd predictor = state.phi + dt * k1;
  predictor(N) = 0.0;
  MetricProfile m1;
  const Eigen::VectorXd k2 = rhs_at(state, predictor, state.t + dt, &m1);
  Eigen::VectorXd next = state.phi + (0.5 * dt) * (k1 + k2);
  next(N) = 0.0;
  if (!next.allFinite()) {
    std::ostringstream os;
    os << "non-finite potential after step at t = " << state.t;
    throw NumericalError(os.str());
  }
  const MetricProfile m2 = metric_profile(state, next, state.t + dt);

  report.dt = dt;
  report.max_abs_rhs = k1.cwiseAbs().maxCoeff();
  report.positivity_margin = std::min({m0.a.minCoeff(), m0.b.minCoeff(), m2.a.minCoeff(), m2.b.minCoeff()});

  state.phi = std::move(next);
  state.t += dt;
  state.steps += 1;
  state.last_dt = dt;
  return report;
}

std::pair<FlowState, StepReport> step(const FlowState& state, double dt) {
  FlowState next = state;
  const StepReport report = advance(next, dt);
  return {std::move(next), report};
}

RunResult run_until(FlowState& state, double t_end, const Schedule& schedule, const Observer& observer) {
  RunResult result;
  if (!(t_end > state.t)) return result;
  if (!(schedule.record_every > 0.0)) throw ArgumentError("record cadence must be positive");
  const double h = schedule.record_every;

  while (state.t < t_end) {
    const double k = std::floor(state.t / h * (1.0 + 1e-12) + 1e-9) + 1.0;
    const double next_event = std::min(k * h, t_end);
    const double cfl = cfl_dt(state);
    const bool lands = next_event - state.t <= cfl;
    double dt = lands ? next_event - state.t : cfl;
    try {
      advance(state, dt);
    } catch (const PositivityError&) {
      advance(state, 0.5 * dt);
      continue;
    }
    if (lands) {
      state.t = next_event;
      result.observations += 1;
      if (observer && observer(state)) {
        result.stopped_early = state.t < t_end;
        break;
      }
    }
  }
  return result;
}

}  // namespace krf
