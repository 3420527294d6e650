#pragma once

// Random generators for property suites. Every generator draws only from the
// engine passed in, so one seed per instance is enough to replay it.

#include <random>

#include "krf/hermitian.hpp"

namespace krf {

template <typename Scalar, typename Engine>
ComplexMatrix<Scalar> random_complex_matrix(Engine& rng, int rows, int cols) {
  std::normal_distribution<Scalar> normal(0, 1);
  ComplexMatrix<Scalar> m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = Complex<Scalar>(normal(rng), normal(rng));
  return m;
}

/// X X^* + floor * I with X Gaussian; condition numbers span a few decades.
template <typename Scalar, typename Engine>
MetricForm<Scalar> random_metric(Engine& rng, int n, Scalar floor = Scalar(0.05)) {
  const ComplexMatrix<Scalar> x = random_complex_matrix<Scalar>(rng, n, n);
  ComplexMatrix<Scalar> g = x * x.adjoint() + floor * ComplexMatrix<Scalar>::Identity(n, n);
  g = Scalar(0.5) * (g + g.adjoint()).eval();
  return MetricForm<Scalar>(g);
}

/// Gaussian tensor projected onto the Kahler-symmetric subspace by averaging
/// over the symmetry group generated by (i k), (j l) and conjugate reversal.
template <typename Scalar, typename Engine>
CurvatureTensor<Scalar> random_curvature(Engine& rng, int n) {
  std::normal_distribution<Scalar> normal(0, 1);
  CurvatureTensor<Scalar> raw(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) raw(i, j, k, l) = Complex<Scalar>(normal(rng), normal(rng));
  CurvatureTensor<Scalar> r(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const Complex<Scalar> s = raw(i, j, k, l) + raw(k, j, i, l) + raw(i, l, k, j) + raw(k, l, i, j) +
                                    std::conj(raw(j, i, l, k) + raw(l, i, j, k) + raw(j, k, l, i) + raw(l, k, j, i));
          r(i, j, k, l) = s / Scalar(8);
        }
  return r;
}

/// A(k, a, b) symmetric in (k, a), otherwise Gaussian.
template <typename Scalar, typename Engine>
FirstJet<Scalar> random_first_jet(Engine& rng, int n) {
  std::normal_distribution<Scalar> normal(0, 1);
  FirstJet<Scalar> a(n);
  for (int k = 0; k < n; ++k)
    for (int p = k; p < n; ++p)
      for (int b = 0; b < n; ++b) {
        const Complex<Scalar> v(normal(rng), normal(rng));
        a(k, p, b) = v;
        a(p, k, b) = v;
      }
  return a;
}

}  // namespace krf
