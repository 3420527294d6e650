#pragma once

// Pointwise Hermitian linear algebra on C^n: metric forms, Kahler curvature
// tensors, holomorphic sectional curvature, and the algebraic inequalities
// (Royden's contraction bound, Yau's Cauchy-Schwarz step, the eigenvalue
// sandwich) used by the Schwarz-lemma argument.
//
// Index conventions. A Hermitian form h is stored as a matrix with
// entry (i, j) = h_{i jbar}. For a metric G, the inverse metric g^{i jbar} is
// G^{-1}(j, i), so g^{i jbar} h_{i jbar} = trace(G^{-1} H).
// Curvature entries R(i, j, k, l) = R_{i jbar k lbar} with
//   R_{i jbar k lbar} = -d_i d_jbar g_{k lbar} + g^{p qbar} d_i g_{k qbar} d_jbar g_{p lbar},
// which makes the complex-hyperbolic ball negatively curved.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "krf/errors.hpp"

namespace krf {

template <typename Scalar>
using Complex = std::complex<Scalar>;
template <typename Scalar>
using ComplexMatrix = Eigen::Matrix<Complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using ComplexVector = Eigen::Matrix<Complex<Scalar>, Eigen::Dynamic, 1>;

template <typename Scalar>
bool is_hermitian(const ComplexMatrix<Scalar>& h, Scalar rel_tol = Scalar(1e-12)) {
  if (h.rows() != h.cols()) return false;
  const Scalar scale = std::max(Scalar(1), h.cwiseAbs().maxCoeff());
  return (h - h.adjoint()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

/// Positive-definite Hermitian form g_{i jbar} with its inverse and a
/// g-unitary frame precomputed.
template <typename Scalar>
class MetricForm {
 public:
  using Matrix = ComplexMatrix<Scalar>;
  using Vector = ComplexVector<Scalar>;

  explicit MetricForm(Matrix g) : g_(std::move(g)) {
    if (g_.rows() == 0 || g_.rows() != g_.cols()) throw ArgumentError("metric must be a nonempty square matrix");
    if (!is_hermitian<Scalar>(g_)) throw InvariantError("metric is not conjugate-symmetric");
    Eigen::LLT<Matrix> llt(g_);
    if (llt.info() != Eigen::Success) throw InvariantError("metric is not positive definite");
    const Matrix lower = llt.matrixL();
    inv_ = llt.solve(Matrix::Identity(dim(), dim()));
    // E = L^{-T} satisfies E^T G conj(E) = I.
    frame_ = lower.template triangularView<Eigen::Lower>().solve(Matrix::Identity(dim(), dim())).transpose();
  }

  static MetricForm identity(int n) { return MetricForm(Matrix::Identity(n, n)); }

  int dim() const { return static_cast<int>(g_.rows()); }
  const Matrix& matrix() const { return g_; }
  const Matrix& inverse() const { return inv_; }
  const Matrix& frame() const { return frame_; }

  Complex<Scalar> lower(int i, int j) const { return g_(i, j); }
  /// g^{i jbar}
  Complex<Scalar> upper(int i, int j) const { return inv_(j, i); }

  /// |v|_g^2 = g_{i jbar} v^i conj(v^j)
  Scalar norm_squared(const Vector& v) const { return std::real((v.transpose() * g_ * v.conjugate())(0, 0)); }

 private:
  Matrix g_;
  Matrix inv_;
  Matrix frame_;
};

/// R_{i jbar k lbar} on C^n.
template <typename Scalar>
class CurvatureTensor {
 public:
  explicit CurvatureTensor(int n) : n_(n), data_(static_cast<std::size_t>(n * n * n * n)) {
    if (n < 1) throw ArgumentError("curvature tensor dimension must be >= 1");
  }

  int dim() const { return n_; }

  Complex<Scalar>& operator()(int i, int j, int k, int l) { return data_[index(i, j, k, l)]; }
  const Complex<Scalar>& operator()(int i, int j, int k, int l) const { return data_[index(i, j, k, l)]; }

  Scalar max_abs() const {
    Scalar m = 0;
    for (const auto& v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  /// Largest violation of R_{i jbar k lbar} = R_{k jbar i lbar} = R_{i lbar k jbar}
  /// and R_{i jbar k lbar} = conj(R_{j ibar l kbar}).
  Scalar symmetry_defect() const {
    Scalar d = 0;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        for (int k = 0; k < n_; ++k)
          for (int l = 0; l < n_; ++l) {
            const auto& r = (*this)(i, j, k, l);
            d = std::max(d, std::abs(r - (*this)(k, j, i, l)));
            d = std::max(d, std::abs(r - (*this)(i, l, k, j)));
            d = std::max(d, std::abs(r - std::conj((*this)(j, i, l, k))));
          }
    return d;
  }

  void validate(Scalar rel_tol = Scalar(1e-10)) const {
    if (symmetry_defect() > rel_tol * std::max(Scalar(1), max_abs()))
      throw InvariantError("curvature tensor violates a Kahler symmetry");
  }

  CurvatureTensor& operator+=(const CurvatureTensor& o) {
    check_same(o);
    for (std::size_t q = 0; q < data_.size(); ++q) data_[q] += o.data_[q];
    return *this;
  }
  CurvatureTensor& operator-=(const CurvatureTensor& o) {
    check_same(o);
    for (std::size_t q = 0; q < data_.size(); ++q) data_[q] -= o.data_[q];
    return *this;
  }
  CurvatureTensor& operator*=(Scalar a) {
    for (auto& v : data_) v *= a;
    return *this;
  }

 private:
  std::size_t index(int i, int j, int k, int l) const {
    return static_cast<std::size_t>(((i * n_ + j) * n_ + k) * n_ + l);
  }
  void check_same(const CurvatureTensor& o) const {
    if (o.n_ != n_) throw ArgumentError("curvature tensor dimension mismatch");
  }

  int n_;
  std::vector<Complex<Scalar>> data_;
};

template <typename Scalar>
CurvatureTensor<Scalar> operator+(CurvatureTensor<Scalar> a, const CurvatureTensor<Scalar>& b) {
  return a += b;
}
template <typename Scalar>
CurvatureTensor<Scalar> operator-(CurvatureTensor<Scalar> a, const CurvatureTensor<Scalar>& b) {
  return a -= b;
}
template <typename Scalar>
CurvatureTensor<Scalar> operator*(Scalar s, CurvatureTensor<Scalar> a) {
  return a *= s;
}

/// A(k, a, b) = hat-nabla_k g_{a bbar}. Kahler: symmetric in (k, a).
template <typename Scalar>
class FirstJet {
 public:
  explicit FirstJet(int n) : n_(n), data_(static_cast<std::size_t>(n * n * n)) {
    if (n < 1) throw ArgumentError("first jet dimension must be >= 1");
  }

  int dim() const { return n_; }
  Complex<Scalar>& operator()(int k, int a, int b) { return data_[index(k, a, b)]; }
  const Complex<Scalar>& operator()(int k, int a, int b) const { return data_[index(k, a, b)]; }

  Scalar symmetry_defect() const {
    Scalar d = 0;
    for (int k = 0; k < n_; ++k)
      for (int a = 0; a < n_; ++a)
        for (int b = 0; b < n_; ++b) d = std::max(d, std::abs((*this)(k, a, b) - (*this)(a, k, b)));
    return d;
  }

  void validate(Scalar rel_tol = Scalar(1e-10)) const {
    Scalar scale = 1;
    for (const auto& v : data_) scale = std::max(scale, std::abs(v));
    if (symmetry_defect() > rel_tol * scale) throw InvariantError("first jet is not symmetric in (k, i)");
  }

 private:
  std::size_t index(int k, int a, int b) const { return static_cast<std::size_t>((k * n_ + a) * n_ + b); }

  int n_;
  std::vector<Complex<Scalar>> data_;
};

namespace detail {

template <typename Scalar>
void require_same_dim(int a, int b, const char* what) {
  if (a != b) throw ArgumentError(std::string("dimension mismatch: ") + what);
}

}  // namespace detail

/// tr_g h = g^{i jbar} h_{i jbar}
template <typename Scalar>
Scalar trace_of(const ComplexMatrix<Scalar>& h, const MetricForm<Scalar>& g) {
  detail::require_same_dim<Scalar>(static_cast<int>(h.rows()), g.dim(), "trace_of");
  if (!is_hermitian<Scalar>(h)) throw InvariantError("trace_of: form is not conjugate-symmetric");
  return std::real((g.inverse() * h).trace());
}

/// Bound on every eigenvalue given prod(lambda) <= C and 1/lambda_i <= C:
/// lambda_j = prod / prod_{i != j} <= C * C^{n-1}.
template <typename Scalar>
Scalar eigen_sandwich_bound(Scalar c, int n) {
  if (n < 1) throw ArgumentError("eigen_sandwich_bound: n must be >= 1");
  if (!(c >= Scalar(1))) throw ArgumentError("eigen_sandwich_bound: premises are inconsistent for C < 1");
  return std::pow(c, n);
}

/// Constant holomorphic sectional curvature -c with respect to g:
/// R_{i jbar k lbar} = -(c/2)(g_{i jbar} g_{k lbar} + g_{i lbar} g_{k jbar}).
template <typename Scalar>
CurvatureTensor<Scalar> constant_hsc_curvature(const MetricForm<Scalar>& g, Scalar c) {
  const int n = g.dim();
  CurvatureTensor<Scalar> r(n);
  const auto& m = g.matrix();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) r(i, j, k, l) = -(c / Scalar(2)) * (m(i, j) * m(k, l) + m(i, l) * m(k, j));
  return r;
}

/// Components of r in the g-unitary frame of g.
template <typename Scalar>
CurvatureTensor<Scalar> in_unitary_frame(const CurvatureTensor<Scalar>& r, const MetricForm<Scalar>& g) {
  const int n = r.dim();
  detail::require_same_dim<Scalar>(n, g.dim(), "in_unitary_frame");
  const auto& e = g.frame();
  // One index at a time; holomorphic slots take E, antiholomorphic slots conj(E).
  CurvatureTensor<Scalar> a(n), b(n);
  for (int p = 0; p < n; ++p)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          Complex<Scalar> s = 0;
          for (int i = 0; i < n; ++i) s += e(i, p) * r(i, j, k, l);
          a(p, j, k, l) = s;
        }
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          Complex<Scalar> s = 0;
          for (int j = 0; j < n; ++j) s += std::conj(e(j, q)) * a(p, j, k, l);
          b(p, q, k, l) = s;
        }
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int t = 0; t < n; ++t)
        for (int l = 0; l < n; ++l) {
          Complex<Scalar> s = 0;
          for (int k = 0; k < n; ++k) s += e(k, t) * b(p, q, k, l);
          a(p, q, t, l) = s;
        }
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int t = 0; t < n; ++t)
        for (int u = 0; u < n; ++u) {
          Complex<Scalar> s = 0;
          for (int l = 0; l < n; ++l) s += std::conj(e(l, u)) * a(p, q, t, l);
          b(p, q, t, u) = s;
        }
  return b;
}

namespace detail {

template <typename Scalar>
Scalar quartic(const CurvatureTensor<Scalar>& r, const ComplexVector<Scalar>& v) {
  const int n = r.dim();
  Complex<Scalar> s = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) s += r(i, j, k, l) * v(i) * std::conj(v(j)) * v(k) * std::conj(v(l));
  return std::real(s);
}

}  // namespace detail

/// H(eta) = R(eta, conj eta, eta, conj eta) / |eta|_g^4.
template <typename Scalar>
Scalar hsc_eval(const CurvatureTensor<Scalar>& r, const MetricForm<Scalar>& g, const ComplexVector<Scalar>& eta) {
  detail::require_same_dim<Scalar>(r.dim(), g.dim(), "hsc_eval");
  detail::require_same_dim<Scalar>(static_cast<int>(eta.size()), g.dim(), "hsc_eval vector");
  const Scalar len2 = g.norm_squared(eta);
  if (!(len2 > 0)) throw ArgumentError("hsc_eval: zero direction");
  return detail::quartic(r, eta) / (len2 * len2);
}

struct HscSearch {
  int budget = 64;
  std::uint64_t seed = 0x6b72666c6162ULL;
  int max_iterations = 200;
};

/// Lower bound on sup_eta H(eta): the frame basis directions and then a fixed
/// pseudo-random sequence of unit directions, each refined by projected
/// gradient ascent with backtracking. Start k depends only on k, so the
/// estimate is nondecreasing in the budget.
template <typename Scalar>
Scalar hsc_sup_estimate(const CurvatureTensor<Scalar>& r, const MetricForm<Scalar>& g, const HscSearch& opts = {}) {
  using Vec = ComplexVector<Scalar>;
  const int n = r.dim();
  detail::require_same_dim<Scalar>(n, g.dim(), "hsc_sup_estimate");
  if (opts.budget < 1) throw ArgumentError("hsc_sup_estimate: budget must be >= 1");

  const CurvatureTensor<Scalar> rf = in_unitary_frame(r, g);
  const Scalar scale = std::max(rf.max_abs(), std::numeric_limits<Scalar>::min());

  auto ascend = [&](Vec xi) {
    xi.normalize();
    Scalar f = detail::quartic(rf, xi);
    Scalar step = Scalar(0.25) / scale;
    for (int it = 0; it < opts.max_iterations && step * scale > Scalar(1e-14); ++it) {
      Vec grad = Vec::Zero(n);
      for (int b = 0; b < n; ++b) {
        Complex<Scalar> s = 0;
        for (int a = 0; a < n; ++a)
          for (int c = 0; c < n; ++c)
            for (int d = 0; d < n; ++d) s += rf(a, b, c, d) * xi(a) * xi(c) * std::conj(xi(d));
        grad(b) = Scalar(4) * s;
      }
      grad -= std::real(xi.dot(grad)) * xi;
      if (grad.norm() < Scalar(1e-13) * scale) break;
      for (;;) {
        Vec trial = (xi + step * grad).normalized();
        const Scalar ft = detail::quartic(rf, trial);
        if (ft > f) {
          xi = trial;
          f = ft;
          step *= Scalar(1.5);
          break;
        }
        step *= Scalar(0.5);
        if (step * scale <= Scalar(1e-14)) break;
      }
    }
    return f;
  };

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<Scalar> normal(0, 1);
  Scalar best = -std::numeric_limits<Scalar>::infinity();
  for (int k = 0; k < opts.budget; ++k) {
    Vec xi(n);
    if (k < n) {
      xi.setZero();
      xi(k) = 1;
    } else {
      for (int a = 0; a < n; ++a) xi(a) = Complex<Scalar>(normal(rng), normal(rng));
      if (xi.norm() == Scalar(0)) xi(0) = 1;
    }
    best = std::max(best, ascend(xi));
  }
  return best;
}

/// Ric_{i jbar} = g^{k lbar} R_{i jbar k lbar}
template <typename Scalar>
ComplexMatrix<Scalar> ricci_contraction(const CurvatureTensor<Scalar>& r, const MetricForm<Scalar>& g) {
  const int n = r.dim();
  detail::require_same_dim<Scalar>(n, g.dim(), "ricci_contraction");
  ComplexMatrix<Scalar> ric = ComplexMatrix<Scalar>::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) ric(i, j) += g.upper(k, l) * r(i, j, k, l);
  return ric;
}

template <typename Scalar>
struct RoydenTerms {
  Scalar lhs;
  Scalar rhs;
  bool holds;
};

/// lhs = g^{k lbar} g^{i jbar} Rhat_{k lbar i jbar},
/// rhs = -((n+1)/(2n)) kappa S^2 with S = tr_g ghat.
/// Caller certifies that Rhat has H <= -kappa with respect to ghat.
template <typename Scalar>
RoydenTerms<Scalar> royden_check(const CurvatureTensor<Scalar>& rhat, const MetricForm<Scalar>& g,
                                 const MetricForm<Scalar>& ghat, Scalar kappa, Scalar rel_tol = Scalar(1e-10)) {
  const int n = rhat.dim();
  detail::require_same_dim<Scalar>(n, g.dim(), "royden_check g");
  detail::require_same_dim<Scalar>(n, ghat.dim(), "royden_check ghat");
  if (!(kappa > 0)) throw ArgumentError("royden_check: kappa must be positive");
  rhat.validate();

  Complex<Scalar> lhs = 0;
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) lhs += g.upper(k, l) * g.upper(i, j) * rhat(k, l, i, j);
  const Scalar s = trace_of(ghat.matrix(), g);
  const Scalar rhs = -Scalar(n + 1) / Scalar(2 * n) * kappa * s * s;
  const Scalar l = std::real(lhs);
  return {l, rhs, l <= rhs + rel_tol * std::abs(rhs)};
}

template <typename Scalar>
struct YauTerms {
  Scalar lhs;
  Scalar rhs;
};

/// lhs = |grad S|_g^2 / S^2 and
/// rhs = g^{k lbar} g_{m nbar} ghat_{i jbar} hat-nabla_k g^{i nbar} hat-nabla_lbar g^{m jbar} / S,
/// where S = tr_g ghat and A(k, a, b) = hat-nabla_k g_{a bbar}.
/// The inequality lhs <= rhs is pure Cauchy-Schwarz and holds for any A;
/// check_jet = false skips the Kahler-symmetry check for algebraic tests.
template <typename Scalar>
YauTerms<Scalar> yau_identity_terms(const MetricForm<Scalar>& g, const MetricForm<Scalar>& ghat,
                                    const FirstJet<Scalar>& a, bool check_jet = true) {
  using Mat = ComplexMatrix<Scalar>;
  const int n = g.dim();
  detail::require_same_dim<Scalar>(n, ghat.dim(), "yau_identity_terms ghat");
  detail::require_same_dim<Scalar>(n, a.dim(), "yau_identity_terms jet");
  if (check_jet) a.validate();

  const Mat& ginv = g.inverse();
  const Mat& gm = g.matrix();
  const Mat& gh = ghat.matrix();
  // Y_k(n, i) = -hat-nabla_k g^{i nbar} = (G^{-1} X_k G^{-1})(n, i), X_k(a, b) = A(k, a, b).
  std::vector<Mat> y(static_cast<std::size_t>(n));
  ComplexVector<Scalar> grad_s(n);
  for (int k = 0; k < n; ++k) {
    Mat x(n, n);
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) x(p, q) = a(k, p, q);
    y[k] = ginv * x * ginv;
    grad_s(k) = -(y[k] * gh).trace();
  }
  const Scalar s = trace_of(gh, g);

  Complex<Scalar> grad_norm = 0;
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) grad_norm += g.upper(k, l) * grad_s(k) * std::conj(grad_s(l));

  Complex<Scalar> q = 0;
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) {
      const Complex<Scalar> gkl = g.upper(k, l);
      for (int m = 0; m < n; ++m)
        for (int nn = 0; nn < n; ++nn)
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
              q += gkl * gm(m, nn) * gh(i, j) * y[k](nn, i) * std::conj(y[l](m, j));
    }
  return {std::real(grad_norm) / (s * s), std::real(q) / s};
}

/// |R|_g: the norm of all components in a g-unitary frame.
template <typename Scalar>
Scalar curvature_norm(const CurvatureTensor<Scalar>& r, const MetricForm<Scalar>& g) {
  const CurvatureTensor<Scalar> rf = in_unitary_frame(r, g);
  const int n = r.dim();
  Scalar s = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) s += std::norm(rf(i, j, k, l));
  return std::sqrt(s);
}

using Metric = MetricForm<double>;
using Curvature = CurvatureTensor<double>;
using CMatrix = ComplexMatrix<double>;
using CVector = ComplexVector<double>;

}  // namespace krf
