#include "krf/diagnostics.hpp"

#include <cstdio>
#include <limits>
#include <sstream>

namespace krf {

namespace {

constexpr int kFitWindow = 7;
constexpr int kFitDegree = 5;
constexpr std::array<double, 5> kFactorial{1, 1, 2, 6, 24};

// Least-squares quintic on 7 unit-spaced nodes, evaluated at window position p:
// row k of weights(p) maps the window values to the k-th Taylor coefficient.
const std::array<Eigen::MatrixXd, kFitWindow>& fit_weights() {
  static const std::array<Eigen::MatrixXd, kFitWindow> weights = [] {
    std::array<Eigen::MatrixXd, kFitWindow> w;
    for (int p = 0; p < kFitWindow; ++p) {
      Eigen::MatrixXd v(kFitWindow, kFitDegree + 1);
      for (int j = 0; j < kFitWindow; ++j)
        for (int m = 0; m <= kFitDegree; ++m) v(j, m) = std::pow(static_cast<double>(j - p), m);
      w[p] = v.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(kFitWindow, kFitWindow));
    }
    return w;
  }();
  return weights;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string to_csv_row(const DiagnosticsRecord& r) {
  const double fields[] = {r.t,
                           r.sup_S,
                           r.schwarz_threshold,
                           r.sup_phidot,
                           r.einstein_residual,
                           r.lambda_ratio_min,
                           r.lambda_ratio_max,
                           r.christoffel_diff,
                           r.boundary_influence,
                           r.heat_identity_residual,
                           r.dt};
  std::string row;
  for (std::size_t i = 0; i < std::size(fields); ++i) {
    if (i) row += ',';
    row += format_double(fields[i]);
  }
  return row;
}

double schwarz_threshold(int n, double kappa) {
  if (!(kappa > 0.0)) return std::numeric_limits<double>::infinity();
  return std::max(static_cast<double>(n), 2.0 * n / ((n + 1) * kappa));
}

TraceProfile trace_S(const FlowState& state) {
  const Background& bg = *state.background;
  const int N = bg.intervals;
  const MetricProfile m = metric_profile(state);
  TraceProfile out;
  out.values = (bg.b0.head(N).array() / m.b.array()).matrix();
  if (bg.n > 1) out.values.array() += (bg.n - 1) * (bg.a0.head(N).array() / m.a.array());
  out.sup = out.values.maxCoeff();
  return out;
}

DecayFit fit_decay_rate(std::span<const double> t, std::span<const double> y) {
  if (t.size() != y.size()) throw ArgumentError("fit_decay_rate: size mismatch");
  DecayFit fit;
  fit.points = static_cast<int>(t.size());
  if (fit.points < 5) throw ArgumentError("fit_decay_rate: degenerate window (fewer than 5 points)");
  int zeros = 0;
  for (const double v : y) zeros += (v == 0.0);
  if (zeros == fit.points) {
    fit.exact_zero = true;
    return fit;
  }
  if (zeros > 0) throw ArgumentError("fit_decay_rate: degenerate window (some values are zero)");
  Eigen::MatrixXd a(fit.points, 2);
  Eigen::VectorXd rhs(fit.points);
  for (int i = 0; i < fit.points; ++i) {
    if (!(t[i] > 0.0) || !(y[i] > 0.0)) throw ArgumentError("fit_decay_rate: times and values must be positive");
    a(i, 0) = 1.0;
    a(i, 1) = -t[i];
    rhs(i) = std::log(y[i]) - std::log(t[i]);
  }
  const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(rhs);
  fit.amplitude = std::exp(coef(0));
  fit.rate = coef(1);
  return fit;
}

DecayFit phidot_decay_fit(std::span<const DiagnosticsRecord> records, double t1, double t2) {
  std::vector<double> t, y;
  for (const auto& r : records) {
    if (r.t >= t1 && r.t <= t2 && r.t > 0.0) {
      t.push_back(r.t);
      y.push_back(r.sup_phidot);
    }
  }
  return fit_decay_rate(t, y);
}

double einstein_residual(const FlowState& state) {
  const Background& bg = *state.background;
  const int N = bg.intervals;
  const MetricProfile m = metric_profile(state);
  // With L = log(det g / det g0) (zero at the Dirichlet node), F' = f1 + D1 L
  // and a = e^{-t} a0 + (1 - e^{-t}) f1 + D1 phi, so F' - a reduces to
  // e^{-t} (f1 - a0) + D1 phidot; same for the radial part. Evaluated in this
  // form to avoid cancellation.
  const Eigen::VectorXd phidot = rhs(state);
  const double e = std::exp(-state.t);
  const Eigen::ArrayXd tangential =
      (e * (bg.f1.head(N) - bg.a0.head(N)) + radial_d1(phidot, bg.ds)).array().abs() / m.a.array();
  const Eigen::ArrayXd radial =
      (e * (bg.fr.head(N) - bg.b0.head(N)) + radial_d2(phidot, bg.ds)).array().abs() / m.b.array();
  return std::max(tangential.maxCoeff(), radial.maxCoeff());
}

EquivalenceRatios equivalence_ratios(const FlowState& state) {
  const Background& bg = *state.background;
  const int N = bg.intervals;
  const MetricProfile m = metric_profile(state);
  const Eigen::ArrayXd ra = m.a.array() / bg.a0.head(N).array();
  const Eigen::ArrayXd rb = m.b.array() / bg.b0.head(N).array();
  return {std::min(ra.minCoeff(), rb.minCoeff()), std::max(ra.maxCoeff(), rb.maxCoeff())};
}

double heat_identity_residual(const FlowState& prev, const FlowState& mid, const FlowState& next) {
  const double h1 = mid.t - prev.t;
  const double h2 = next.t - mid.t;
  if (!(h1 > 0.0 && h2 > 0.0) || std::abs(h2 - h1) > 1e-9 * (h1 + h2))
    throw ArgumentError("heat_identity_residual: snapshots must be at uniform cadence");
  if (prev.background != mid.background || next.background != mid.background)
    throw ArgumentError("heat_identity_residual: snapshots come from different grids");

  const Background& bg = *mid.background;
  const int N = bg.intervals;
  const int n = bg.n;
  const Eigen::VectorXd e_prev = std::exp(prev.t) * rhs(prev);
  const Eigen::VectorXd e_mid = std::exp(mid.t) * rhs(mid);
  const Eigen::VectorXd e_next = std::exp(next.t) * rhs(next);
  const Eigen::VectorXd de = (e_next - e_prev) / (next.t - prev.t);

  const MetricProfile m = metric_profile(mid);
  Eigen::ArrayXd lap = radial_d2(e_mid, bg.ds).array() / m.b.array();
  Eigen::ArrayXd tr = (bg.b0.head(N) - bg.fr.head(N)).array() / m.b.array();
  if (n > 1) {
    lap += (n - 1) * radial_d1(e_mid, bg.ds).array() / m.a.array();
    tr += (n - 1) * (bg.a0.head(N) - bg.f1.head(N)).array() / m.a.array();
  }
  return (de.head(N).array() - lap + tr).abs().maxCoeff();
}

double heat_identity_probe(const FlowState& state) {
  const double h = 0.9 * cfl_dt(state);
  FlowState s1 = state;
  advance(s1, h);
  FlowState s2 = s1;
  advance(s2, h);
  return heat_identity_residual(state, s1, s2);
}

PotentialJet evolving_jet(const FlowState& state, int node) {
  const Background& bg = *state.background;
  const int N = bg.intervals;
  if (node < 0 || node > N) throw ArgumentError("evolving_jet: node out of range");
  const double e = std::exp(-state.t);
  // U = e^{-t} u0 + (1 - e^{-t}) F_smooth + rest, where the fitted rest
  // = (1 - e^{-t}) (F0 - F_smooth) + phi is as regular as U itself.
  const int start = std::clamp(node - kFitWindow / 2, 0, N + 1 - kFitWindow);
  const Eigen::VectorXd rest = (1.0 - e) * bg.f_offset.segment(start, kFitWindow) + state.phi.segment(start, kFitWindow);
  const Eigen::VectorXd coef = fit_weights()[node - start] * rest;
  PotentialJet j;
  j.s = bg.s(node);
  double scale = 1.0;
  for (int k = 1; k <= 4; ++k) {
    scale /= bg.ds;
    j.d[k - 1] = e * bg.u_d[k - 1](node) + (1.0 - e) * bg.smooth_f_d[k - 1](node) + kFactorial[k] * coef(k) * scale;
  }
  return j;
}

double christoffel_diff(const FlowState& state, const FlowState& reference) {
  if (state.background->intervals != reference.background->intervals ||
      state.background->s_max != reference.background->s_max)
    throw ArgumentError("christoffel_diff: grid mismatch");
  const int n = state.n();
  double sup = 0;
  for (int i = 0; i <= state.intervals(); ++i)
    sup = std::max(sup, christoffel_difference_sq(n, evolving_jet(state, i), evolving_jet(reference, i)));
  return sup;
}

double boundary_influence(const FlowState& state) {
  const int N = state.intervals();
  const int first = static_cast<int>(std::ceil(0.9 * N));
  return state.phi.segment(first, N + 1 - first).cwiseAbs().maxCoeff();
}

double curvature_sup(const FlowState& state) {
  const int n = state.n();
  double sup = 0;
  for (int i = 0; i <= state.intervals(); ++i) {
    const PotentialJet j = evolving_jet(state, i);
    sup = std::max(sup, curvature_norm(curvature_tensor_at(n, j), metric_at(n, j)));
  }
  return sup;
}

Monitor::Monitor(FlowState reference, double kappa_est) : reference_(std::move(reference)), kappa_(kappa_est) {}

DiagnosticsRecord Monitor::record(const FlowState& state) const {
  const Background& bg = *state.background;
  const int N = bg.intervals;
  const int n = bg.n;
  DiagnosticsRecord r;
  r.t = state.t;
  const TraceProfile trace = trace_S(state);
  r.sup_S = trace.sup;
  r.schwarz_threshold = schwarz_threshold(n, kappa_);
  const Eigen::VectorXd phidot = rhs(state);
  r.sup_phidot = phidot.cwiseAbs().maxCoeff();
  r.einstein_residual = einstein_residual(state);
  const EquivalenceRatios ratios = equivalence_ratios(state);
  r.lambda_ratio_min = ratios.min;
  r.lambda_ratio_max = ratios.max;
  r.christoffel_diff = christoffel_diff(state, reference_);
  r.boundary_influence = boundary_influence(state);
  r.heat_identity_residual = heat_identity_probe(state);
  r.dt = state.last_dt;
  r.sup_phi = state.phi.cwiseAbs().maxCoeff();
  // det g(t) / det g0 = e^{phi + phidot}
  r.volume_ratio_max = (phidot.head(N) + state.phi.head(N)).array().exp().maxCoeff();
  r.curvature_sup = curvature_sup(state);
  return r;
}

bool VerdictReport::all_pass() const {
  if (partial) return false;
  for (const auto& c : criteria)
    if (!c.pass) return false;
  return true;
}

const Criterion& VerdictReport::find(const std::string& name) const {
  for (const auto& c : criteria)
    if (c.name == name) return c;
  throw ArgumentError("no criterion named " + name);
}

std::string VerdictReport::to_text() const {
  std::ostringstream os;
  for (const auto& c : criteria)
    os << "criterion=" << c.name << " pass=" << (c.pass ? "true" : "false") << " measured=" << format_double(c.measured)
       << " threshold=" << format_double(c.threshold) << '\n';
  if (partial) os << "partial=true\n";
  return os.str();
}

VerdictReport verdict(std::span<const DiagnosticsRecord> records, double kappa_est, double b_est, int n,
                      const VerdictSettings& settings) {
  VerdictReport report;
  report.criteria.push_back({"hypothesis_kappa", kappa_est > 0.0, kappa_est, 0.0});
  if (records.empty()) {
    report.partial = true;
    return report;
  }

  const double bound = schwarz_threshold(n, kappa_est) + settings.schwarz_slack;
  double sup_s = 0, c_max = 0, c_bound = 0, curv = 0;
  bool sandwich_ok = true;
  for (const auto& r : records) {
    sup_s = std::max(sup_s, r.sup_S);
    const double c = r.equivalence_constant();
    c_max = std::max(c_max, c);
    const double allowed = std::max(r.sandwich_bound(n), r.sup_S);
    c_bound = std::max(c_bound, allowed);
    if (!(r.lambda_ratio_max <= r.sandwich_bound(n) * (1 + 1e-12)) || !(1.0 / r.lambda_ratio_min <= r.sup_S * (1 + 1e-12)))
      sandwich_ok = false;
    curv = std::max(curv, r.curvature_sup);
  }
  report.criteria.push_back({"schwarz_bound", sup_s <= bound, sup_s, bound});

  const double t_last = records.back().t;
  const bool stationary =
      std::all_of(records.begin(), records.end(), [](const DiagnosticsRecord& r) { return r.sup_phidot <= kStationaryPhidot; });
  if (stationary) {
    report.criteria.push_back(
        {"phidot_decay_rate", true, std::numeric_limits<double>::infinity(), settings.min_decay_rate});
  } else try {
    const DecayFit fit = phidot_decay_fit(records, settings.decay_t1, std::min(settings.decay_t2, t_last));
    if (fit.exact_zero)
      report.criteria.push_back(
          {"phidot_decay_rate", true, std::numeric_limits<double>::infinity(), settings.min_decay_rate});
    else
      report.criteria.push_back({"phidot_decay_rate", fit.rate >= settings.min_decay_rate, fit.rate,
                                 settings.min_decay_rate});
  } catch (const ArgumentError&) {
    report.partial = true;
    report.criteria.push_back({"phidot_decay_rate", false, std::numeric_limits<double>::quiet_NaN(),
                               settings.min_decay_rate});
  }

  report.criteria.push_back({"metric_equivalence_C", std::isfinite(c_max) && sandwich_ok, c_max, c_bound});
  const double final_residual = records.back().einstein_residual;
  report.criteria.push_back(
      {"einstein_limit", final_residual < settings.einstein_target, final_residual, settings.einstein_target});
  const double curv_bound = settings.curvature_factor * b_est;
  report.criteria.push_back({"curvature_bounded", std::isfinite(curv) && curv <= curv_bound, curv, curv_bound});
  return report;
}

}  // namespace krf
