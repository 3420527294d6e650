#include "krf/runner.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "krf/numfmt.hpp"
#include "krf/snapshot.hpp"

namespace krf {

namespace fs = std::filesystem;

int exit_code_for(const Error& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ArgumentError*>(&e)) return kExitConfig;
  if (dynamic_cast<const HypothesisError*>(&e)) return kExitHypothesis;
  if (dynamic_cast<const PositivityError*>(&e) || dynamic_cast<const NumericalError*>(&e)) return kExitNumerical;
  if (dynamic_cast<const InvariantError*>(&e)) return kExitVerdict;
  return kExitConfig;
}

namespace {

void say(const RunOptions& opts, const std::string& line) {
  if (opts.log) *opts.log << line << '\n';
}

bool on_cadence(double t, double every) {
  if (!(every > 0.0)) return false;
  const double k = std::round(t / every);
  return k >= 1.0 && std::abs(t - k * every) <= 1e-9 * std::max(1.0, t);
}

// A family that fails positivity at construction is an invalid configuration,
// not a mid-run failure.
RadialPotential build_family(const RunConfig& c) {
  try {
    return make_family(c.n, c.family);
  } catch (const PositivityError& e) {
    throw ConfigError(std::string("family is not Kahler: ") + e.what());
  }
}

HypothesisConstants measure_hypothesis(const RadialPotential& u, const RunConfig& c) {
  HscSearch search;
  search.seed = c.seed;
  const std::vector<double> grid = hypothesis_grid(c.family.s_max, kHypothesisPoints);
  return hypothesis_constants(u, grid, search);
}

Snapshot make_snapshot(const RunConfig& c, const FlowState& s, const std::vector<DiagnosticsRecord>& records) {
  Snapshot snap;
  snap.config = c;
  snap.t = s.t;
  snap.steps = s.steps;
  snap.last_dt = s.last_dt;
  snap.phi = s.phi;
  snap.records = records;
  return snap;
}

class Session {
 public:
  Session(RunConfig config, const RunOptions& opts) : c_(std::move(config)), opts_(opts), dir_(c_.out) {}

  // `resume` carries the state and records to continue from.
  RunOutcome execute(const Snapshot* resume) {
    RunOutcome out;
    const RadialPotential u = build_family(c_);
    out.hypothesis = measure_hypothesis(u, c_);
    say(opts_, "kappa_est=" + sig17(out.hypothesis.kappa_est) + " b_est=" + sig17(out.hypothesis.b_est));
    if (!c_.force) require_hypothesis(out.hypothesis);

    const FlowState reference = init_flow(u, c_.intervals, c_.family.s_max, c_.sigma);
    const Monitor monitor(reference, out.hypothesis.kappa_est);
    FlowState state = reference;
    std::vector<DiagnosticsRecord>& records = out.records;
    if (resume) {
      if (resume->phi.size() != state.phi.size()) throw ConfigError("snapshot grid does not match its config");
      state.phi = resume->phi;
      state.t = resume->t;
      state.steps = resume->steps;
      state.last_dt = resume->last_dt;
      records = resume->records;
    }

    fs::create_directories(dir_);
    write_atomic(dir_ / "config.echo", serialize(c_));
    if (!resume) records.push_back(monitor.record(state));

    const Observer observer = [&](const FlowState& s) {
      records.push_back(monitor.record(s));
      const DiagnosticsRecord& r = records.back();
      if (on_cadence(s.t, c_.snapshot_every)) persist(s, records);
      return c_.early_stop > 0.0 && r.einstein_residual < c_.early_stop;
    };

    try {
      const RunResult rr = run_until(state, c_.t_end, Schedule{c_.record_every}, observer);
      if (rr.stopped_early) say(opts_, "early stop at t=" + sig17(state.t));
    } catch (const Error& e) {
      const int code = exit_code_for(e);
      if (code != kExitNumerical) throw;
      persist(state, records);
      out.exit_code = code;
      out.message = e.what();
      out.final_state = state;
      return out;
    }

    persist(state, records);
    out.verdict = verdict(records, out.hypothesis.kappa_est, out.hypothesis.b_est, c_.n, verdict_settings(c_));
    write_atomic(dir_ / "verdict.txt", out.verdict->to_text());
    if (opts_.svg) write_plots(dir_ / "plots", records);
    out.exit_code = out.verdict->all_pass() ? kExitOk : kExitVerdict;
    out.final_state = std::move(state);
    return out;
  }

 private:
  void persist(const FlowState& s, const std::vector<DiagnosticsRecord>& records) {
    write_snapshot(dir_, make_snapshot(c_, s, records));
    write_atomic(dir_ / "diagnostics.csv", csv_text(records));
  }

  RunConfig c_;
  const RunOptions& opts_;
  fs::path dir_;
};

RunOutcome guarded(const std::function<RunOutcome()>& body) {
  try {
    return body();
  } catch (const Error& e) {
    RunOutcome out;
    out.exit_code = exit_code_for(e);
    out.message = e.what();
    return out;
  } catch (const fs::filesystem_error& e) {
    RunOutcome out;
    out.exit_code = kExitConfig;
    out.message = e.what();
    return out;
  }
}

}  // namespace

RunOutcome run_flow(const RunConfig& config, const RunOptions& opts) {
  return guarded([&] {
    validate(config);
    return Session(config, opts).execute(nullptr);
  });
}

RunOutcome resume_flow(const fs::path& dir, const RunOptions& opts) {
  return guarded([&] {
    const auto latest = latest_snapshot(dir);
    if (!latest) throw ConfigError("no snapshot found in " + dir.string());
    const Snapshot snap = read_snapshot(*latest);
    RunConfig c = snap.config;
    c.out = dir.string();
    say(opts, "resuming from " + latest->filename().string());
    return Session(c, opts).execute(&snap);
  });
}

std::string csv_text(const std::vector<DiagnosticsRecord>& records) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : records) out += to_csv_row(r) + "\n";
  return out;
}

void write_plots(const fs::path& dir, const std::vector<DiagnosticsRecord>& records) {
  fs::create_directories(dir);
  const char* names[] = {"sup_S",           "schwarz_threshold", "sup_phidot",
                         "einstein_residual", "lambda_ratio_min",  "lambda_ratio_max",
                         "christoffel_diff", "boundary_influence", "heat_identity_residual",
                         "dt"};
  double DiagnosticsRecord::*fields[] = {&DiagnosticsRecord::sup_S,
                                         &DiagnosticsRecord::schwarz_threshold,
                                         &DiagnosticsRecord::sup_phidot,
                                         &DiagnosticsRecord::einstein_residual,
                                         &DiagnosticsRecord::lambda_ratio_min,
                                         &DiagnosticsRecord::lambda_ratio_max,
                                         &DiagnosticsRecord::christoffel_diff,
                                         &DiagnosticsRecord::boundary_influence,
                                         &DiagnosticsRecord::heat_identity_residual,
                                         &DiagnosticsRecord::dt};
  constexpr double W = 640, H = 400, M = 50;
  for (std::size_t f = 0; f < std::size(names); ++f) {
    std::vector<double> t, y;
    for (const auto& r : records) {
      t.push_back(r.t);
      y.push_back(r.*fields[f]);
    }
    // Log scale when the column is positive and spans more than three decades.
    double ymin = HUGE_VAL, ymax = -HUGE_VAL;
    for (double v : y) ymin = std::min(ymin, v), ymax = std::max(ymax, v);
    const bool logscale = ymin > 0 && ymax / ymin > 1e3;
    if (logscale)
      for (double& v : y) v = std::log10(v);
    if (logscale) ymin = std::log10(ymin), ymax = std::log10(ymax);
    if (!(ymax > ymin)) ymax = ymin + 1;
    const double tmin = t.empty() ? 0 : t.front(), tmax = t.empty() || t.back() <= tmin ? tmin + 1 : t.back();

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    svg << "<rect x=\"" << M << "\" y=\"" << M << "\" width=\"" << W - 2 * M << "\" height=\"" << H - 2 * M
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << M << "\" y=\"" << M - 15 << "\" font-family=\"monospace\" font-size=\"14\">" << names[f]
        << (logscale ? " (log10)" : "") << " vs t</text>\n";
    svg << "<text x=\"5\" y=\"" << M + 5 << "\" font-family=\"monospace\" font-size=\"10\">" << sig17(ymax)
        << "</text>\n";
    svg << "<text x=\"5\" y=\"" << H - M << "\" font-family=\"monospace\" font-size=\"10\">" << sig17(ymin)
        << "</text>\n";
    svg << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (!std::isfinite(y[i])) continue;
      const double x = M + (t[i] - tmin) / (tmax - tmin) * (W - 2 * M);
      const double yy = H - M - (y[i] - ymin) / (ymax - ymin) * (H - 2 * M);
      svg << x << ',' << yy << ' ';
    }
    svg << "\"/>\n</svg>\n";
    write_atomic(dir / (std::string(names[f]) + ".svg"), svg.str());
  }
}

std::string RefineReport::to_text() const {
  std::ostringstream os;
  os << "grids=";
  for (std::size_t i = 0; i < grids.size(); ++i) os << (i ? "," : "") << grids[i];
  os << '\n';
  for (const auto& r : rows) {
    os << "quantity=" << r.quantity << " values=";
    for (std::size_t i = 0; i < r.values.size(); ++i) os << (i ? "," : "") << sig17(r.values[i]);
    os << " order=" << (r.degenerate ? std::string("exact") : sig17(r.order))
       << " degenerate=" << (r.degenerate ? "true" : "false") << " pass=" << (r.pass ? "true" : "false") << '\n';
  }
  if (!message.empty()) os << "message=" << message << '\n';
  return os.str();
}

RefineReport refine(const RunConfig& base, int rungs, double min_order) {
  RefineReport report;
  try {
    validate(base);
    if (rungs < 3) throw ConfigError("refinement needs at least three rungs");
    const double t1 = std::min(1.0, base.t_end);
    std::vector<Eigen::VectorXd> common;
    RefineRow max_phi{"max_phi", {}, 0, false, false};
    RefineRow pointwise{"phi_common_nodes", {}, 0, false, false};
    RefineRow heat{"heat_identity_residual", {}, 0, false, false};
    for (int k = 0; k < rungs; ++k) {
      RunConfig c = base;
      c.intervals = base.intervals << k;
      report.grids.push_back(c.intervals);
      const RadialPotential u = build_family(c);
      FlowState state = init_flow(u, c.intervals, c.family.s_max, c.sigma);
      run_until(state, t1, Schedule{t1}, nullptr);
      Eigen::VectorXd on_base(base.intervals + 1);
      for (int i = 0; i <= base.intervals; ++i) on_base(i) = state.phi(i << k);
      max_phi.values.push_back(on_base.cwiseAbs().maxCoeff());
      if (!common.empty()) pointwise.values.push_back((on_base - common.back()).cwiseAbs().maxCoeff());
      common.push_back(on_base);
      heat.values.push_back(heat_identity_probe(state));
    }

    const double phi_scale = 1.0 + max_phi.values.back();
    // Successive differences of the scalar.
    std::vector<double> diffs;
    for (int k = 0; k + 1 < rungs; ++k) diffs.push_back(std::abs(max_phi.values[k] - max_phi.values[k + 1]));
    auto orders_from = [](const std::vector<double>& v) {
      double worst = HUGE_VAL;
      for (std::size_t k = 0; k + 1 < v.size(); ++k) worst = std::min(worst, std::log2(v[k] / v[k + 1]));
      return worst;
    };
    const double roundoff = 1e-14 * phi_scale;
    max_phi.degenerate = *std::max_element(diffs.begin(), diffs.end()) <= roundoff;
    max_phi.order = orders_from(diffs);
    pointwise.degenerate = *std::max_element(pointwise.values.begin(), pointwise.values.end()) <= roundoff;
    pointwise.order = orders_from(pointwise.values);
    heat.degenerate = *std::max_element(heat.values.begin(), heat.values.end()) <= 1e-9;
    heat.order = orders_from(heat.values);
    for (RefineRow* r : {&max_phi, &pointwise, &heat}) {
      r->pass = r->degenerate || r->order >= min_order;
      report.rows.push_back(*r);
    }
    bool all = true;
    for (const auto& r : report.rows) all = all && r.pass;
    report.exit_code = all ? kExitOk : kExitVerdict;
  } catch (const Error& e) {
    report.exit_code = exit_code_for(e);
    report.message = e.what();
  }
  return report;
}

std::string OracleReport::to_text() const {
  std::ostringstream os;
  os << "kappa_est=" << sig17(hypothesis.kappa_est) << " b_est=" << sig17(hypothesis.b_est)
     << " satisfied=" << (hypothesis.satisfied ? "true" : "false") << '\n';
  for (const auto& r : rows)
    os << "s=" << sig17(r.s) << " hsc_sup=" << sig17(r.hsc_sup) << " hsc_inf=" << sig17(r.hsc_inf)
       << " rm_norm=" << sig17(r.rm_norm) << " fd_delta=" << sig17(r.fd_delta) << '\n';
  os << "kappa_spread=" << sig17(kappa_spread) << " analytic=" << (analytic ? "true" : "false") << '\n';
  return os.str();
}

OracleReport oracle(const RunConfig& config, const std::vector<double>& s_list) {
  validate(config);
  if (s_list.empty()) throw ConfigError("oracle needs at least one s value");
  for (double s : s_list)
    if (!(s >= 0.0 && s < config.family.s_max)) throw ConfigError("oracle s values must lie in [0, s_max)");
  const RadialPotential u = build_family(config);
  HscSearch search;
  search.seed = config.seed;
  OracleReport report;
  report.hypothesis = hypothesis_constants(u, s_list, search);
  report.analytic = config.family.family != Family::perturbed_model || config.family.epsilon == 0.0;
  double kmin = HUGE_VAL, kmax = -HUGE_VAL;
  for (const auto& sample : report.hypothesis.samples) {
    OracleRow row{sample.s, sample.hsc_sup, sample.hsc_inf, sample.norm, 0};
    const Curvature exact = curvature_tensor_at(u, sample.s);
    // Coordinate components grow like (1 - s)^-4; the step and the delta follow that scale.
    const Curvature fd = curvature_tensor_fd(u, sample.s, 1e-3 * (1.0 - sample.s));
    row.fd_delta = (fd - exact).max_abs() / std::max(1.0, exact.max_abs());
    kmin = std::min(kmin, -sample.hsc_sup);
    kmax = std::max(kmax, -sample.hsc_sup);
    report.rows.push_back(row);
  }
  report.kappa_spread = kmax - kmin;
  return report;
}

ProptestOutcome property_tests(const ProptestOptions& opts, const fs::path& replay_dir) {
  ProptestOutcome out;
  out.report = run_property_suites(opts);
  std::ostringstream text;
  for (const auto& s : out.report.suites) text << s.line() << '\n';
  if (out.report.vacuous) text << "vacuous=true (samples=0, nothing was checked)\n";
  constexpr std::size_t kMaxReplays = 5;
  for (const auto& s : out.report.suites) {
    for (std::size_t i = 0; i < s.failing_seeds.size() && i < kMaxReplays; ++i) {
      fs::create_directories(replay_dir);
      const fs::path file =
          replay_dir / ("replay_" + s.name + "_n" + std::to_string(s.n) + "_" + std::to_string(s.failing_seeds[i]) + ".txt");
      write_atomic(file, replay_instance(s.name, s.n, s.failing_seeds[i]));
      out.replay_files.push_back(file);
      text << "replay=" << file.string() << '\n';
    }
  }
  out.exit_code = out.report.total_failures() > 0 ? kExitVerdict : kExitOk;
  out.text = text.str();
  return out;
}

}  // namespace krf
