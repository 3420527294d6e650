#include <gtest/gtest.h>

#include <cmath>

#include "krf/radial.hpp"

using namespace krf;

namespace {

FamilyParams model(double c) {
  FamilyParams p;
  p.family = Family::model_ball;
  p.c = c;
  return p;
}

FamilyParams flat() {
  FamilyParams p;
  p.family = Family::flat;
  return p;
}

FamilyParams perturbed(int n, double eps) {
  FamilyParams p;
  p.family = Family::perturbed_model;
  p.c = n + 1;
  p.epsilon = eps;
  return p;
}

const double kS[] = {0.0, 0.1, 0.3, 0.5, 0.7, 0.85};

}  // namespace

TEST(EigenPair, Flat) {
  const RadialPotential u = make_family(2, flat());
  for (double s : kS) {
    const RadialPair p = eigen_pair(u, s);
    EXPECT_EQ(p.tangential, 1.0);
    EXPECT_EQ(p.radial, 1.0);
  }
}

TEST(EigenPair, ModelHalf) {
  // u = -log(1 - s): u' = 1/(1-s), u'' = 1/(1-s)^2
  const RadialPair p = eigen_pair(make_family(1, model(1.0)), 0.5);
  EXPECT_DOUBLE_EQ(p.tangential, 2.0);
  EXPECT_DOUBLE_EQ(p.radial, 4.0);
}

TEST(EigenPair, DegenerateAtOrigin) {
  // u = s^2 at s = 0
  PotentialJet j;
  j.s = 0.0;
  j.d = {0.0, 2.0, 0.0, 0.0, 0.0, 0.0};
  EXPECT_THROW(eigen_pair(j), PositivityError);
}

TEST(EigenPair, EqualAtOrigin) {
  const RadialPair p = eigen_pair(make_family(3, perturbed(3, 0.05)), 0.0);
  EXPECT_EQ(p.tangential, p.radial);
}

TEST(LogDet, Flat) {
  const RadialPotential u = make_family(3, flat());
  for (double s : kS) {
    const LogDetProfile f = log_det_profile(u, s);
    EXPECT_EQ(f.value, 0.0);
    EXPECT_EQ(f.d1, 0.0);
    EXPECT_EQ(f.radial, 0.0);
  }
}

TEST(LogDet, ModelOneDimensional) {
  for (double c : {0.5, 1.0, 3.0}) {
    const RadialPotential u = make_family(1, model(c));
    for (double s : kS) {
      const LogDetProfile f = log_det_profile(u, s);
      EXPECT_NEAR(f.value, -2 * std::log(1 - s) + std::log(c), 1e-13);
      EXPECT_NEAR(f.d1, 2 / (1 - s), 1e-12);
      // (s F')' = 2/(1-s) + 2s/(1-s)^2
      EXPECT_NEAR(f.radial, 2 / (1 - s) + 2 * s / ((1 - s) * (1 - s)), 1e-11);
    }
  }
}

TEST(LogDet, EinsteinPropertyOfModel) {
  for (int n = 1; n <= 3; ++n) {
    const RadialPotential u = make_family(n, model(n + 1));
    const double base = log_det_profile(u, 0.0).value - u.value(0.0);
    for (double s : kS) EXPECT_NEAR(log_det_profile(u, s).value - (n + 1) * (-std::log(1 - s)), base, 1e-12);
  }
}

TEST(LogDet, DeterminantMatchesMetricMatrix) {
  for (int n = 1; n <= 3; ++n)
    for (const FamilyParams& p : {model(n + 1), perturbed(n, 0.05), flat()}) {
      const RadialPotential u = make_family(n, p);
      const double f0 = log_det_profile(u, 0.0).value;
      const double det0 = std::real(metric_at(n, u.jet(0.0)).matrix().determinant());
      for (double s : kS) {
        const PotentialJet j = u.jet(s);
        const RadialPair ab = eigen_pair(j);
        const double det = std::real(metric_at(n, j).matrix().determinant());
        EXPECT_NEAR(det, std::pow(ab.tangential, n - 1) * ab.radial, 1e-12 * det);
        EXPECT_NEAR(std::exp(log_det_profile(u, s).value - f0), det / det0, 1e-12 * det / det0);
      }
    }
}

TEST(Ricci, FlatVanishes) {
  const RadialPair r = ricci_eigen_pair(make_family(2, flat()), 0.4);
  EXPECT_EQ(r.tangential, 0.0);
  EXPECT_EQ(r.radial, 0.0);
}

TEST(Ricci, EinsteinModel) {
  for (int n = 1; n <= 3; ++n) {
    const RadialPotential u = make_family(n, model(n + 1));
    for (int i = 0; i <= 100; ++i) {
      const double s = 0.89 * i / 100;
      const RadialPair r = ricci_eigen_pair(u, s);
      const RadialPair g = eigen_pair(u, s);
      EXPECT_LT(std::abs(r.tangential + g.tangential) / g.tangential, 1e-12);
      EXPECT_LT(std::abs(r.radial + g.radial) / g.radial, 1e-12);
    }
  }
}

TEST(Ricci, ModelUnitConstantAtOrigin) {
  const RadialPair r = ricci_eigen_pair(make_family(1, model(1.0)), 0.0);
  EXPECT_NEAR(r.tangential, -2.0, 1e-14);
  EXPECT_NEAR(r.radial, -2.0, 1e-14);
}

TEST(Ricci, MatchesCurvatureContraction) {
  for (int n = 1; n <= 3; ++n) {
    const RadialPotential u = make_family(n, perturbed(n, 0.05));
    for (double s : {0.05, 0.25, 0.3, 0.37, 0.7}) {
      const PotentialJet j = u.jet(s);
      const CMatrix ric = ricci_contraction(curvature_tensor_at(n, j), metric_at(n, j));
      const RadialPair r = ricci_eigen_pair(n, j);
      EXPECT_NEAR(ric(0, 0).real(), r.radial, 1e-10 * std::abs(r.radial));
      if (n > 1) EXPECT_NEAR(ric(1, 1).real(), r.tangential, 1e-10 * std::abs(r.tangential));
    }
  }
}

TEST(Curvature, FlatIsZero) {
  EXPECT_EQ(curvature_tensor_at(make_family(3, flat()), 0.4).max_abs(), 0.0);
}

TEST(Curvature, ModelMatchesFiniteDifferences) {
  const RadialPotential u = make_family(1, model(1.0));
  const Curvature exact = curvature_tensor_at(u, 0.0);
  EXPECT_LT((curvature_tensor_fd(u, 0.0) - exact).max_abs(), 1e-6);
  for (int n = 2; n <= 3; ++n) {
    const RadialPotential v = make_family(n, perturbed(n, 0.05));
    for (double s : {0.0, 0.25, 0.3, 0.5})
      EXPECT_LT((curvature_tensor_fd(v, s) - curvature_tensor_at(v, s)).max_abs(), 1e-6) << "n=" << n << " s=" << s;
  }
}

TEST(Curvature, FiniteDifferencesConvergeAtSecondOrderOrBetter) {
  const RadialPotential u = make_family(2, perturbed(2, 0.05));
  const Curvature exact = curvature_tensor_at(u, 0.28);
  const double e1 = (curvature_tensor_fd(u, 0.28, 4e-3) - exact).max_abs();
  const double e2 = (curvature_tensor_fd(u, 0.28, 2e-3) - exact).max_abs();
  EXPECT_GT(e1 / e2, 3.5);
}

TEST(Curvature, KahlerSymmetries) {
  for (int n = 1; n <= 3; ++n) {
    const RadialPotential u = make_family(n, perturbed(n, 0.05));
    for (double s : kS) {
      const Curvature r = curvature_tensor_at(u, s);
      EXPECT_LE(r.symmetry_defect(), 1e-12 * std::max(1.0, r.max_abs()));
    }
  }
}

TEST(Curvature, ModelHomogeneity) {
  for (int n = 1; n <= 3; ++n) {
    const RadialPotential u = make_family(n, model(n + 1));
    const Curvature r0 = curvature_tensor_at(u, 0.0);
    const Curvature r5 = curvature_tensor_at(u, 0.5);
    const Metric g0 = metric_at(n, u.jet(0.0)), g5 = metric_at(n, u.jet(0.5));
    EXPECT_NEAR(hsc_sup_estimate(r0, g0), hsc_sup_estimate(r5, g5), 1e-6);
    EXPECT_NEAR(curvature_norm(r0, g0), curvature_norm(r5, g5), 1e-6);
  }
}

TEST(Curvature, ModelIsConstantHsc) {
  // omega = c i ddbar(-log(1 - |z|^2)) has H = -2/c
  for (int n = 1; n <= 3; ++n)
    for (double c : {1.0, 2.5}) {
      const RadialPotential u = make_family(n, model(c));
      const PotentialJet j = u.jet(0.4);
      const Curvature r = curvature_tensor_at(n, j);
      const Metric g = metric_at(n, j);
      EXPECT_LT((r - constant_hsc_curvature(g, 2.0 / c)).max_abs(), 1e-10 * r.max_abs());
    }
}

TEST(Hypothesis, FlatRefused) {
  const RadialPotential u = make_family(1, flat());
  const auto h = hypothesis_constants(u, hypothesis_grid(0.9, 16));
  EXPECT_EQ(h.kappa_est, 0.0);
  EXPECT_FALSE(h.satisfied);
  EXPECT_THROW(require_hypothesis(h), HypothesisError);
}

TEST(Hypothesis, ModelUniform) {
  const auto h = hypothesis_constants(make_family(1, model(1.0)), hypothesis_grid(0.9, 64));
  double lo = HUGE_VAL, hi = -HUGE_VAL;
  for (const auto& s : h.samples) lo = std::min(lo, -s.hsc_sup), hi = std::max(hi, -s.hsc_sup);
  EXPECT_LT(hi - lo, 1e-6);
  EXPECT_NEAR(h.kappa_est, 2.0, 1e-10);
  EXPECT_TRUE(h.satisfied);
}

TEST(Hypothesis, PerturbationMovesKappaByOrderEpsilon) {
  for (int n = 1; n <= 2; ++n) {
    const auto grid = hypothesis_grid(0.9, 256);
    const double k0 = hypothesis_constants(make_family(n, perturbed(n, 0.0)), grid).kappa_est;
    const double k1 = hypothesis_constants(make_family(n, perturbed(n, 0.01)), grid).kappa_est;
    const double k2 = hypothesis_constants(make_family(n, perturbed(n, 0.02)), grid).kappa_est;
    EXPECT_GT(k2, 0.0);
    // roughly linear in eps
    EXPECT_NEAR((k0 - k2) / (k0 - k1), 2.0, 0.2);
    EXPECT_LT(std::abs(k0 - k2), 60 * 0.02 * k0);
  }
}

TEST(Family, ZeroEpsilonIsModel) {
  const RadialPotential u = make_family(2, perturbed(2, 0.0));
  const RadialPotential m = make_family(2, model(3.0));
  for (double s : kS) EXPECT_EQ(u.jet(s).d, m.jet(s).d);
}

TEST(Family, BenchmarkPositivity) {
  for (int n = 1; n <= 3; ++n) EXPECT_NO_THROW(make_family(n, perturbed(n, 0.05)));
}

TEST(Family, HugeBumpRejected) {
  for (int n = 1; n <= 3; ++n) {
    EXPECT_THROW(make_family(n, perturbed(n, 1e3)), PositivityError);
    // eps = 10 stays Kahler but destroys negative curvature
    const auto h = hypothesis_constants(make_family(n, perturbed(n, 10.0)), hypothesis_grid(0.9, 256));
    EXPECT_LE(h.kappa_est, 0.0);
  }
}

TEST(Family, BadParametersRejected) {
  FamilyParams p = perturbed(1, 0.05);
  p.center = 0.55;  // support leaves the buffer
  EXPECT_THROW(make_family(1, p), ConfigError);
  EXPECT_THROW(make_family(4, perturbed(3, 0.05)), ConfigError);
  FamilyParams q = model(-1.0);
  EXPECT_THROW(make_family(1, q), ConfigError);
}

TEST(Family, BumpDerivativesMatchDifferences) {
  const RadialPotential u = make_family(1, perturbed(1, 0.05));
  const double h = 1e-5;
  for (double s : {0.22, 0.3, 0.35}) {
    const PotentialJet jm = u.jet(s - h), jp = u.jet(s + h), j = u.jet(s);
    EXPECT_NEAR((u.value(s + h) - u.value(s - h)) / (2 * h), j[1], 1e-8);
    for (int k = 1; k < kJetOrder; ++k)
      EXPECT_NEAR((jp[k] - jm[k]) / (2 * h), j[k + 1], 1e-6 * std::max(1.0, std::abs(j[k + 1]))) << "order " << k + 1;
  }
}
