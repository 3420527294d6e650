#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "krf/config.hpp"
#include "krf/diagnostics.hpp"

using namespace krf;

namespace {

FlowState fixed_point(int n, int N) {
  const RunConfig c = fixed_point_config(n);
  return init_flow(make_family(n, c.family), N, c.family.s_max, c.sigma);
}

FlowState benchmark(int n, int N) {
  const RunConfig c = benchmark_config(n, N);
  return init_flow(make_family(n, c.family), N, c.family.s_max, c.sigma);
}

DiagnosticsRecord clean_record(double t, int n) {
  DiagnosticsRecord r;
  r.t = t;
  r.sup_S = n;
  r.schwarz_threshold = n;
  r.sup_phidot = std::exp(-t);
  r.lambda_ratio_min = r.lambda_ratio_max = 1;
  r.volume_ratio_max = 1;
  r.curvature_sup = 1;
  r.einstein_residual = 1e-9;
  return r;
}

std::vector<DiagnosticsRecord> clean_run(int n) {
  std::vector<DiagnosticsRecord> rs;
  for (int k = 0; k <= 40; ++k) rs.push_back(clean_record(0.25 * k, n));
  return rs;
}

}  // namespace

TEST(Csv, HeaderIsFrozen) {
  EXPECT_STREQ(kCsvHeader,
               "t,sup_S,schwarz_threshold,sup_phidot,einstein_residual,lambda_ratio_min,lambda_ratio_max,"
               "christoffel_diff,boundary_influence,heat_identity_residual,dt");
}

TEST(Csv, RowUsesSeventeenDigits) {
  DiagnosticsRecord r;
  r.t = 0.1;
  r.sup_S = 1.0 / 3.0;
  const std::string row = to_csv_row(r);
  EXPECT_EQ(row.substr(0, row.find(',', row.find(',') + 1)), "0.10000000000000001,0.33333333333333331");
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), 10);
}

TEST(TraceS, InitialIsDimension) {
  for (int n = 1; n <= 3; ++n) {
    const TraceProfile p = trace_S(benchmark(n, 128));
    EXPECT_LE((p.values.array() - n).abs().maxCoeff(), 1e-14);
    EXPECT_NEAR(p.sup, n, 1e-14);
  }
}

TEST(SchwarzThreshold, Examples) {
  EXPECT_EQ(schwarz_threshold(2, 1.0), 2.0);
  EXPECT_EQ(schwarz_threshold(1, 4.0), 1.0);
  EXPECT_DOUBLE_EQ(schwarz_threshold(1, 0.5), 2.0);
  EXPECT_TRUE(std::isinf(schwarz_threshold(1, 0.0)));
}

TEST(DecayFit, RecoversPlantedRate) {
  std::vector<double> t, y;
  for (double s = 2.0; s <= 8.0 + 1e-12; s += 0.25) t.push_back(s), y.push_back(s * std::exp(-s));
  const DecayFit f = fit_decay_rate(t, y);
  EXPECT_NEAR(f.rate, 1.0, 1e-6);
  EXPECT_NEAR(f.amplitude, 1.0, 1e-6);
  EXPECT_FALSE(f.exact_zero);
  EXPECT_EQ(f.points, 25);
}

TEST(DecayFit, OtherRates) {
  std::vector<double> t, y;
  for (double s = 2.0; s <= 8.0; s += 0.5) t.push_back(s), y.push_back(3.0 * s * std::exp(-1.7 * s));
  EXPECT_NEAR(fit_decay_rate(t, y).rate, 1.7, 1e-10);
  EXPECT_NEAR(fit_decay_rate(t, y).amplitude, 3.0, 1e-9);
}

TEST(DecayFit, DegenerateWindows) {
  const std::vector<double> t{2, 3, 4, 5, 6}, zero(5, 0.0), some{1, 0, 1, 1, 1};
  EXPECT_TRUE(fit_decay_rate(t, zero).exact_zero);
  EXPECT_THROW(fit_decay_rate(std::vector<double>{2, 3, 4}, std::vector<double>{1, 1, 1}), ArgumentError);
  EXPECT_THROW(fit_decay_rate(t, some), ArgumentError);
}

TEST(DecayFit, RecordWindow) {
  std::vector<DiagnosticsRecord> rs;
  for (int k = 0; k <= 40; ++k) {
    DiagnosticsRecord r;
    r.t = 0.25 * k;
    r.sup_phidot = r.t * std::exp(-r.t) + (r.t < 2 ? 5.0 : 0.0);
    rs.push_back(r);
  }
  const DecayFit f = phidot_decay_fit(rs, 2.0, 8.0);
  EXPECT_NEAR(f.rate, 1.0, 1e-9);
  EXPECT_EQ(f.points, 25);
}

TEST(EinsteinResidual, FixedPoint) {
  for (int n = 1; n <= 3; ++n) EXPECT_LT(einstein_residual(fixed_point(n, 256)), 1e-10);
}

TEST(EinsteinResidual, InitialMatchesClosedForm) {
  // grid tables agree with the closed form to O(ds^2)
  const int n = 1;
  double prev_gap = HUGE_VAL;
  for (int N : {128, 256, 512}) {
    const FlowState s = benchmark(n, N);
    const RadialPotential& u = s.background->potential;
    double closed = 0;
    for (int i = 0; i < N; ++i) {
      const double si = s.background->s(i);
      const RadialPair r = ricci_eigen_pair(u, si), g = eigen_pair(u, si);
      closed = std::max({closed, std::abs(r.tangential + g.tangential) / g.tangential,
                         std::abs(r.radial + g.radial) / g.radial});
    }
    const double gap = std::abs(einstein_residual(s) - closed);
    EXPECT_LT(gap, 0.02 * closed);
    EXPECT_LT(gap, prev_gap / 3.5);
    prev_gap = gap;
  }
}

TEST(EinsteinResidual, DecaysAlongFlow) {
  FlowState s = benchmark(1, 128);
  run_until(s, 1.0, Schedule{1.0}, nullptr);
  const double r1 = einstein_residual(s);
  run_until(s, 10.0, Schedule{1.0}, nullptr);
  const double r10 = einstein_residual(s);
  EXPECT_LT(r10, r1);
  EXPECT_LT(r10, 1e-4);
}

TEST(EinsteinResidual, ConvergesUnderRefinementAtIntermediateTime) {
  double r[3];
  const int grids[3] = {128, 256, 512};
  for (int k = 0; k < 3; ++k) {
    FlowState s = benchmark(1, grids[k]);
    run_until(s, 2.0, Schedule{2.0}, nullptr);
    r[k] = einstein_residual(s);
  }
  const double order = std::log2(std::abs(r[0] - r[1]) / std::abs(r[1] - r[2]));
  EXPECT_GE(order, 1.5);
}

TEST(EquivalenceRatios, InitialAndFixedPoint) {
  const EquivalenceRatios e0 = equivalence_ratios(benchmark(2, 64));
  EXPECT_EQ(e0.min, 1.0);
  EXPECT_EQ(e0.max, 1.0);
  FlowState s = fixed_point(2, 128);
  run_until(s, 3.0, Schedule{0.5}, [](const FlowState& st) {
    const EquivalenceRatios e = equivalence_ratios(st);
    EXPECT_NEAR(e.min, 1.0, 1e-14);
    EXPECT_NEAR(e.max, 1.0, 1e-14);
    return false;
  });
}

TEST(HeatIdentity, FixedPointVanishes) {
  FlowState s = fixed_point(2, 128);
  run_until(s, 1.0, Schedule{1.0}, nullptr);
  EXPECT_LT(heat_identity_probe(s), 1e-8);
}

TEST(HeatIdentity, PlantedState) {
  // flat omega_0: a0 = b0 = 1 and Ric = 0, phi = alpha t (s_max^2 - s^2).
  const int n = 2, N = 64;
  FamilyParams flat;
  flat.family = Family::flat;
  const FlowState base = init_flow(make_family(n, flat), N, 0.9);
  const double alpha = 0.01, smax = 0.9, ds = smax / N;
  const double times[3] = {0.5, 0.6, 0.7};
  FlowState st[3] = {base, base, base};
  for (int k = 0; k < 3; ++k) {
    st[k].t = times[k];
    for (int i = 0; i <= N; ++i) st[k].phi(i) = alpha * times[k] * (smax * smax - (i * ds) * (i * ds));
  }
  const double got = heat_identity_residual(st[0], st[1], st[2]);

  // Hand oracle: phi' = -2 alpha t s and (s phi')' = -4 alpha t s are exact on
  // quadratics, so a = e^{-t} - 2 alpha t s and b = e^{-t} - 4 alpha t s.
  auto E = [&](int k, int i) {
    const double t = times[k], s = i * ds;
    if (i == N) return 0.0;
    const double phi = alpha * t * (smax * smax - s * s);
    const double a = std::exp(-t) - 2 * alpha * t * s, b = std::exp(-t) - 4 * alpha * t * s;
    return std::exp(t) * ((n - 1) * std::log(a) + std::log(b) - phi);
  };
  double expected = 0;
  const double t = times[1];
  for (int i = 0; i < N; ++i) {
    const double s = i * ds;
    const double a = std::exp(-t) - 2 * alpha * t * s, b = std::exp(-t) - 4 * alpha * t * s;
    const double de = (E(2, i) - E(0, i)) / 0.2;
    double d1, d2;
    if (i == 0) {
      d1 = d2 = (-3 * E(1, 0) + 4 * E(1, 1) - E(1, 2)) / (2 * ds);
    } else {
      d1 = (E(1, i + 1) - E(1, i - 1)) / (2 * ds);
      d2 = ((i + 0.5) * (E(1, i + 1) - E(1, i)) - (i - 0.5) * (E(1, i) - E(1, i - 1))) / ds;
    }
    const double lap = (n - 1) * d1 / a + d2 / b;
    const double tr = (n - 1) / a + 1 / b;
    expected = std::max(expected, std::abs(de - lap + tr));
  }
  EXPECT_NEAR(got, expected, 1e-10 * std::max(1.0, expected));
}

TEST(HeatIdentity, RejectsNonUniformCadence) {
  FlowState a = benchmark(1, 64), b = a, c = a;
  b.t = 0.1;
  c.t = 0.3;
  EXPECT_THROW(heat_identity_residual(a, b, c), ArgumentError);
}

TEST(HeatIdentity, ConvergesUnderRefinement) {
  double r[3];
  const int grids[3] = {64, 128, 256};
  for (int k = 0; k < 3; ++k) {
    FlowState s = benchmark(1, grids[k]);
    run_until(s, 1.0, Schedule{1.0}, nullptr);
    r[k] = heat_identity_probe(s);
  }
  EXPECT_GE(std::log2(r[0] / r[1]), 1.8);
  EXPECT_GE(std::log2(r[1] / r[2]), 1.8);
}

TEST(Christoffel, ZeroAgainstItself) {
  FlowState s = benchmark(2, 64);
  run_until(s, 1.0, Schedule{1.0}, nullptr);
  EXPECT_EQ(christoffel_diff(s, s), 0.0);
}

TEST(Christoffel, FixedPointAgainstLaterReference) {
  FlowState ref = fixed_point(1, 128);
  run_until(ref, 1.0, Schedule{1.0}, nullptr);
  FlowState s = fixed_point(1, 128);
  run_until(s, 4.0, Schedule{0.5}, [&](const FlowState& st) {
    EXPECT_LT(christoffel_diff(st, ref), 1e-20);
    return false;
  });
}

TEST(Christoffel, GridMismatch) {
  EXPECT_THROW(christoffel_diff(benchmark(1, 64), benchmark(1, 128)), ArgumentError);
}

TEST(Jet, InitialJetIsPotentialJet) {
  const FlowState s = benchmark(1, 256);
  const RadialPotential& u = s.background->potential;
  for (int i : {0, 1, 40, 85, 100, 200, 255}) {
    const PotentialJet got = evolving_jet(s, i), want = u.jet(s.background->s(i));
    for (int k = 1; k <= 4; ++k) EXPECT_NEAR(got[k], want[k], 1e-12 * std::max(1.0, std::abs(want[k]))) << i << " " << k;
  }
}

TEST(BoundaryInfluence, OuterTenPercent) {
  FlowState s = benchmark(1, 100);
  EXPECT_EQ(boundary_influence(s), 0.0);
  s.phi(89) = 1.0;
  EXPECT_EQ(boundary_influence(s), 0.0);
  s.phi(90) = -0.5;
  EXPECT_EQ(boundary_influence(s), 0.5);
}

TEST(Curvature, InitialMatchesHypothesisScale) {
  for (int n = 1; n <= 2; ++n) {
    const FlowState s = benchmark(n, 128);
    const double c = curvature_sup(s);
    const auto h = hypothesis_constants(s.background->potential, hypothesis_grid(0.9, 256));
    EXPECT_LE(c, h.b_est * (1 + 1e-6));
    EXPECT_GT(c, 0.5 * h.b_est);
  }
}

TEST(Monitor, SandwichAtEverySnapshot) {
  for (int n = 1; n <= 2; ++n) {
    const FlowState ref = benchmark(n, 128);
    const Monitor mon(ref, 0.9);
    FlowState s = ref;
    run_until(s, 3.0, Schedule{0.5}, [&](const FlowState& st) {
      const DiagnosticsRecord r = mon.record(st);
      EXPECT_LE(r.lambda_ratio_max, r.sandwich_bound(n) * (1 + 1e-12));
      EXPECT_LE(1.0 / r.lambda_ratio_min, r.sup_S * (1 + 1e-12));
      EXPECT_GE(r.sup_S, n * (1 - 1e-12) / std::pow(r.volume_ratio_max, 1.0 / n));
      EXPECT_EQ(r.t, st.t);
      EXPECT_EQ(r.dt, st.last_dt);
      return false;
    });
  }
}

TEST(Verdict, CleanRunPasses) {
  const VerdictReport v = verdict(clean_run(1), 1.0, 1.0, 1);
  EXPECT_TRUE(v.all_pass()) << v.to_text();
  EXPECT_FALSE(v.partial);
  EXPECT_EQ(v.criteria.size(), 6u);
  EXPECT_NEAR(v.find("phidot_decay_rate").measured, 1.0 - 0.0, 0.3);
}

TEST(Verdict, EachCriterionCanFail) {
  auto rs = clean_run(2);
  rs[5].sup_S = 2.5;
  EXPECT_FALSE(verdict(rs, 1.0, 1.0, 2).find("schwarz_bound").pass);
  rs = clean_run(2);
  for (auto& r : rs) r.sup_phidot = std::exp(-0.3 * r.t);
  EXPECT_FALSE(verdict(rs, 1.0, 1.0, 2).find("phidot_decay_rate").pass);
  rs = clean_run(2);
  rs[3].lambda_ratio_max = 50;
  EXPECT_FALSE(verdict(rs, 1.0, 1.0, 2).find("metric_equivalence_C").pass);
  rs = clean_run(2);
  rs.back().einstein_residual = 1e-3;
  EXPECT_FALSE(verdict(rs, 1.0, 1.0, 2).find("einstein_limit").pass);
  rs = clean_run(2);
  rs[7].curvature_sup = 10;
  EXPECT_FALSE(verdict(rs, 1.0, 1.0, 2).find("curvature_bounded").pass);
  EXPECT_FALSE(verdict(clean_run(2), 0.0, 1.0, 2).find("hypothesis_kappa").pass);
}

TEST(Verdict, StationaryRunIsExactZero) {
  auto rs = clean_run(1);
  for (auto& r : rs) r.sup_phidot = 1e-15;
  const Criterion& c = verdict(rs, 1.0, 1.0, 1).find("phidot_decay_rate");
  EXPECT_TRUE(c.pass);
  EXPECT_TRUE(std::isinf(c.measured));
}

TEST(Verdict, IncompleteRecordsArePartial) {
  const VerdictReport empty = verdict({}, 1.0, 1.0, 1);
  EXPECT_TRUE(empty.partial);
  EXPECT_FALSE(empty.all_pass());
  auto rs = clean_run(1);
  rs.resize(6);  // ends at t = 1.25, before the fit window
  const VerdictReport short_run = verdict(rs, 1.0, 1.0, 1);
  EXPECT_TRUE(short_run.partial);
  EXPECT_FALSE(short_run.all_pass());
  EXPECT_NE(short_run.to_text().find("partial=true"), std::string::npos);
}

TEST(Verdict, TextFormat) {
  const std::string text = verdict(clean_run(1), 1.0, 1.0, 1).to_text();
  EXPECT_NE(text.find("criterion=schwarz_bound pass=true measured=1 threshold=1.01\n"), std::string::npos) << text;
  int lines = 0;
  for (char ch : text) lines += ch == '\n';
  EXPECT_EQ(lines, 6);
}

TEST(Verdict, FixedPointRunPassesEverything) {
  const FlowState ref = fixed_point(1, 128);
  const Monitor mon(ref, 1.0);
  std::vector<DiagnosticsRecord> rs{mon.record(ref)};
  FlowState s = ref;
  run_until(s, 5.0, Schedule{0.25}, [&](const FlowState& st) {
    rs.push_back(mon.record(st));
    return false;
  });
  const VerdictReport v = verdict(rs, 1.0, 1.0, 1);
  EXPECT_TRUE(v.all_pass()) << v.to_text();
  for (const auto& r : rs) EXPECT_LE(r.sup_phi, 1e-12);
}
