#pragma once

// U(n)-invariant Kahler metrics on the unit ball, omega = i ddbar u(|z|^2).
// At z = (sqrt(s), 0, ..., 0) the metric g_{i jbar} = u' delta_ij + u'' zbar_i z_j
// has tangential eigenvalue a = u' (multiplicity n-1) and radial eigenvalue
// b = u' + s u'' = (s u')'.

#include <array>
#include <span>
#include <string>
#include <vector>

#include "krf/hermitian.hpp"

namespace krf {

inline constexpr int kMaxDimension = 3;
inline constexpr int kJetOrder = 6;

/// Derivatives u^(1) .. u^(6) of a radial potential at s.
struct PotentialJet {
  double s = 0;
  std::array<double, kJetOrder> d{};

  double operator[](int order) const { return d[static_cast<std::size_t>(order - 1)]; }
};

/// (tangential, radial) eigen-parts of a U(n)-invariant (1,1)-form.
struct RadialPair {
  double tangential = 0;
  double radial = 0;
};

/// F = log det g up to a constant, F' and (s F')'.
struct LogDetProfile {
  double value = 0;
  double d1 = 0;
  double radial = 0;
};

enum class Family { model_ball, flat, perturbed_model };

std::string to_string(Family f);
Family family_from_string(const std::string& name);

struct FamilyParams {
  Family family = Family::model_ball;
  double c = 2.0;
  double epsilon = 0.0;
  double center = 0.3;
  double width = 0.1;
  double s_max = 0.9;
  double s_buf = 0.6;

  bool operator==(const FamilyParams&) const = default;
};

/// u(s) = -c log(1 - s) + eps w^4 B((s - s_c)/w) with B(x) = (1 - x^2)^5 on
/// [-1, 1]; the flat family is u = s. Closed-form derivatives to 6th order.
class RadialPotential {
 public:
  RadialPotential(int n, FamilyParams params);

  int dim() const { return n_; }
  const FamilyParams& params() const { return params_; }

  double value(double s) const;
  PotentialJet jet(double s) const;

 private:
  int n_;
  FamilyParams params_;
};

/// Validated construction: parameter ranges, bump support inside [0, s_buf],
/// and a(s), b(s) > 0 on a 10x refined scan of [0, s_max].
RadialPotential make_family(int n, const FamilyParams& params);

RadialPair eigen_pair(const PotentialJet& jet);
RadialPair eigen_pair(const RadialPotential& u, double s);

LogDetProfile log_det_profile(int n, const PotentialJet& jet);
LogDetProfile log_det_profile(const RadialPotential& u, double s);

/// F, F', F'', F''', F'''' of F = (n-1) log a + log b.
std::array<double, 5> log_det_derivatives(int n, const PotentialJet& jet);

/// Eigen-parts of Ric = -i ddbar F: (-F', -(s F')').
RadialPair ricci_eigen_pair(int n, const PotentialJet& jet);
RadialPair ricci_eigen_pair(const RadialPotential& u, double s);

/// Metric matrix at (sqrt(s), 0, ..., 0).
Metric metric_at(int n, const PotentialJet& jet);

/// R_{i jbar k lbar} at (sqrt(s), 0, ..., 0) from closed-form coordinate
/// derivatives of g (needs u up to 4th order).
Curvature curvature_tensor_at(int n, const PotentialJet& jet);
Curvature curvature_tensor_at(const RadialPotential& u, double s);

/// Christoffel symbols at (sqrt(s), 0, ..., 0): entry (j, k) of element i is
/// Gamma^k_{ij} = g^{k lbar} d_i g_{j lbar}.
std::vector<CMatrix> christoffel_at(int n, const PotentialJet& jet);

/// |Gamma - Gamma_ref|^2 measured in the metric of `jet`.
double christoffel_difference_sq(int n, const PotentialJet& jet, const PotentialJet& reference);

/// Independent route: central differences (with one Richardson step) of the
/// metric field in real coordinates, using only u' and u''.
Curvature curvature_tensor_fd(const RadialPotential& u, double s, double h = 1e-3);

struct CurvatureSample {
  double s = 0;
  double hsc_sup = 0;
  double hsc_inf = 0;
  double norm = 0;
};

struct HypothesisConstants {
  double kappa_est = 0;
  double b_est = 0;
  bool satisfied = false;
  std::vector<CurvatureSample> samples;
};

/// kappa_est = -max_s sup H and B_est = max_s |Rm| over the grid.
HypothesisConstants hypothesis_constants(const RadialPotential& u, std::span<const double> grid,
                                         const HscSearch& search = {});

/// Throws HypothesisError unless kappa_est > 0.
void require_hypothesis(const HypothesisConstants& h);

/// Uniform sample grid on [0, s_max) used for hypothesis checks.
std::vector<double> hypothesis_grid(double s_max, int points);

}  // namespace krf
