#include "krf/radial.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace krf {

namespace {

// Truncated Taylor series f(s + h) = sum_k c[k] h^k.
template <int K>
struct Taylor {
  std::array<double, K + 1> c{};

  Taylor operator+(const Taylor& o) const {
    Taylor r;
    for (int k = 0; k <= K; ++k) r.c[k] = c[k] + o.c[k];
    return r;
  }
  Taylor operator*(const Taylor& o) const {
    Taylor r;
    for (int k = 0; k <= K; ++k)
      for (int j = 0; j <= k; ++j) r.c[k] += c[j] * o.c[k - j];
    return r;
  }
  Taylor scaled(double a) const {
    Taylor r;
    for (int k = 0; k <= K; ++k) r.c[k] = a * c[k];
    return r;
  }
  Taylor log() const {
    Taylor r;
    r.c[0] = std::log(c[0]);
    for (int k = 1; k <= K; ++k) {
      double acc = c[k];
      for (int j = 1; j < k; ++j) acc -= (static_cast<double>(j) / k) * r.c[j] * c[k - j];
      r.c[k] = acc / c[0];
    }
    return r;
  }
};

constexpr std::array<double, 7> kFactorial{1, 1, 2, 6, 24, 120, 720};

// B(x) = (1 - x^2)^5 = sum_j C(5, j) (-1)^j x^{2j}; derivative of order m at x.
double bump_derivative(int m, double x) {
  if (std::abs(x) >= 1.0) return 0.0;
  static constexpr std::array<double, 6> binom{1, 5, 10, 10, 5, 1};
  double sum = 0;
  for (int j = 0; j <= 5; ++j) {
    const int p = 2 * j;
    if (p < m) continue;
    double coef = binom[j] * ((j % 2) ? -1.0 : 1.0);
    for (int q = 0; q < m; ++q) coef *= (p - q);
    sum += coef * std::pow(x, p - m);
  }
  return sum;
}

void check_dim(int n) {
  if (n < 1 || n > kMaxDimension) throw ConfigError("dimension n must be in {1, 2, 3}");
}

// G, d_i G and d_i d_jbar G at z = (sqrt(s), 0, ..., 0).
struct MetricDerivatives {
  CMatrix g;
  std::vector<CMatrix> d;     // d[i](k, l) = d_i g_{k lbar}
  std::vector<CMatrix> dbar;  // dbar[j](k, l) = d_jbar g_{k lbar}
  std::vector<CMatrix> ddbar; // ddbar[i * n + j](k, l)
};

MetricDerivatives metric_derivatives(int n, const PotentialJet& jet) {
  const double u1 = jet[1], u2 = jet[2], u3 = jet[3], u4 = jet[4];
  std::vector<double> z(static_cast<std::size_t>(n), 0.0);
  z[0] = std::sqrt(std::max(jet.s, 0.0));
  auto delta = [](int a, int b) { return a == b ? 1.0 : 0.0; };

  MetricDerivatives m;
  m.g = CMatrix::Zero(n, n);
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) m.g(k, l) = u1 * delta(k, l) + u2 * z[k] * z[l];

  m.d.assign(n, CMatrix::Zero(n, n));
  m.dbar.assign(n, CMatrix::Zero(n, n));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) {
        m.d[i](k, l) = u2 * z[i] * delta(k, l) + u3 * z[i] * z[k] * z[l] + u2 * z[k] * delta(i, l);
        m.dbar[i](k, l) = u2 * z[i] * delta(k, l) + u3 * z[i] * z[k] * z[l] + u2 * delta(i, k) * z[l];
      }

  m.ddbar.assign(static_cast<std::size_t>(n * n), CMatrix::Zero(n, n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          m.ddbar[i * n + j](k, l) =
              u2 * delta(i, j) * delta(k, l) + u3 * z[j] * z[i] * delta(k, l) + u4 * z[j] * z[i] * z[k] * z[l] +
              u3 * (delta(i, j) * z[k] * z[l] + z[i] * delta(j, k) * z[l] + z[j] * z[k] * delta(i, l)) +
              u2 * delta(j, k) * delta(i, l);
        }
  return m;
}

}  // namespace

std::string to_string(Family f) {
  switch (f) {
    case Family::model_ball:
      return "model_ball";
    case Family::flat:
      return "flat";
    case Family::perturbed_model:
      return "perturbed_model";
  }
  return "unknown";
}

Family family_from_string(const std::string& name) {
  if (name == "model_ball") return Family::model_ball;
  if (name == "flat") return Family::flat;
  if (name == "perturbed_model") return Family::perturbed_model;
  throw ConfigError("unknown family '" + name + "'");
}

RadialPotential::RadialPotential(int n, FamilyParams params) : n_(n), params_(params) { check_dim(n); }

double RadialPotential::value(double s) const {
  if (params_.family == Family::flat) return s;
  double v = -params_.c * std::log1p(-s);
  if (params_.family == Family::perturbed_model) {
    const double w = params_.width;
    v += params_.epsilon * std::pow(w, 4) * bump_derivative(0, (s - params_.center) / w);
  }
  return v;
}

PotentialJet RadialPotential::jet(double s) const {
  PotentialJet j;
  j.s = s;
  if (params_.family == Family::flat) {
    j.d[0] = 1.0;
    return j;
  }
  const double inv = 1.0 / (1.0 - s);
  double p = inv;
  for (int k = 1; k <= kJetOrder; ++k) {
    j.d[k - 1] = params_.c * kFactorial[k - 1] * p;
    p *= inv;
  }
  if (params_.family == Family::perturbed_model && params_.epsilon != 0.0) {
    const double w = params_.width;
    const double x = (s - params_.center) / w;
    for (int k = 1; k <= kJetOrder; ++k)
      j.d[k - 1] += params_.epsilon * std::pow(w, 4 - k) * bump_derivative(k, x);
  }
  return j;
}

RadialPotential make_family(int n, const FamilyParams& p) {
  check_dim(n);
  if (!(p.s_max > 0.0 && p.s_max < 1.0)) throw ConfigError("s_max must lie in (0, 1)");
  if (!(p.s_buf > 0.0 && p.s_buf < p.s_max)) throw ConfigError("s_buf must lie in (0, s_max)");
  if (p.family != Family::flat && !(p.c > 0.0)) throw ConfigError("model coefficient c must be positive");
  if (p.family == Family::perturbed_model) {
    if (!(p.width > 0.0)) throw ConfigError("bump width must be positive");
    if (p.center - p.width < 0.0 || p.center + p.width > p.s_buf)
      throw ConfigError("bump support [s_c - w, s_c + w] must lie inside [0, s_buf]");
    if (!std::isfinite(p.epsilon)) throw ConfigError("bump amplitude must be finite");
  }
  RadialPotential u(n, p);
  constexpr int kScan = 10 * 1024;
  for (int i = 0; i <= kScan; ++i) {
    const double s = p.s_max * i / kScan;
    const PotentialJet j = u.jet(s);
    const double a = j[1], b = j[1] + s * j[2];
    if (!(a > 0.0 && b > 0.0)) {
      std::ostringstream os;
      os << "family is not Kahler: first violation at s = " << s;
      throw PositivityError(os.str(), i, s);
    }
  }
  return u;
}

RadialPair eigen_pair(const PotentialJet& jet) {
  const double a = jet[1];
  const double b = jet[1] + jet.s * jet[2];
  if (!(a > 0.0 && b > 0.0)) {
    std::ostringstream os;
    os << "not a Kahler metric at s = " << jet.s << " (a = " << a << ", b = " << b << ")";
    throw PositivityError(os.str(), -1, jet.s);
  }
  return {a, b};
}

RadialPair eigen_pair(const RadialPotential& u, double s) { return eigen_pair(u.jet(s)); }

std::array<double, 5> log_det_derivatives(int n, const PotentialJet& jet) {
  check_dim(n);
  eigen_pair(jet);
  constexpr int K = 4;
  Taylor<K> a, u2, lin;
  for (int k = 0; k <= K; ++k) {
    a.c[k] = jet[k + 1] / kFactorial[k];
    u2.c[k] = jet[k + 2] / kFactorial[k];
  }
  lin.c[0] = jet.s;
  lin.c[1] = 1.0;
  const Taylor<K> b = a + lin * u2;
  const Taylor<K> f = a.log().scaled(n - 1) + b.log();
  std::array<double, 5> out{};
  for (int k = 0; k <= K; ++k) out[k] = f.c[k] * kFactorial[k];
  return out;
}

LogDetProfile log_det_profile(int n, const PotentialJet& jet) {
  check_dim(n);
  const RadialPair ab = eigen_pair(jet);
  const double a = ab.tangential, b = ab.radial, s = jet.s;
  const double a1 = jet[2], a2 = jet[3];
  const double b1 = 2.0 * jet[2] + s * jet[3];
  const double b2 = 3.0 * jet[3] + s * jet[4];
  const double f1 = (n - 1) * a1 / a + b1 / b;
  const double f2 = (n - 1) * (a2 / a - (a1 / a) * (a1 / a)) + b2 / b - (b1 / b) * (b1 / b);
  return {(n - 1) * std::log(a) + std::log(b), f1, f1 + s * f2};
}

LogDetProfile log_det_profile(const RadialPotential& u, double s) { return log_det_profile(u.dim(), u.jet(s)); }

RadialPair ricci_eigen_pair(int n, const PotentialJet& jet) {
  const LogDetProfile f = log_det_profile(n, jet);
  return {-f.d1, -f.radial};
}

RadialPair ricci_eigen_pair(const RadialPotential& u, double s) { return ricci_eigen_pair(u.dim(), u.jet(s)); }

Metric metric_at(int n, const PotentialJet& jet) {
  check_dim(n);
  eigen_pair(jet);
  return Metric(metric_derivatives(n, jet).g);
}

Curvature curvature_tensor_at(int n, const PotentialJet& jet) {
  check_dim(n);
  eigen_pair(jet);
  const MetricDerivatives m = metric_derivatives(n, jet);
  const CMatrix ginv = m.g.inverse();
  Curvature r(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const CMatrix term = -m.ddbar[i * n + j] + m.d[i] * ginv * m.dbar[j];
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) r(i, j, k, l) = term(k, l);
    }
  return r;
}

Curvature curvature_tensor_at(const RadialPotential& u, double s) { return curvature_tensor_at(u.dim(), u.jet(s)); }

std::vector<CMatrix> christoffel_at(int n, const PotentialJet& jet) {
  check_dim(n);
  eigen_pair(jet);
  const MetricDerivatives m = metric_derivatives(n, jet);
  const CMatrix ginv = m.g.inverse();
  std::vector<CMatrix> gamma;
  gamma.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) gamma.push_back(m.d[i] * ginv);
  return gamma;
}

double christoffel_difference_sq(int n, const PotentialJet& jet, const PotentialJet& reference) {
  const Metric g = metric_at(n, jet);
  const std::vector<CMatrix> gamma = christoffel_at(n, jet);
  const std::vector<CMatrix> gamma_ref = christoffel_at(n, reference);
  const CMatrix& e = g.frame();
  const CMatrix e_inv_t = e.inverse().transpose();
  // T'^c_{ab} = sum_i E_{ia} (E^T T_i E^{-T})(b, c)
  std::vector<CMatrix> rotated(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) rotated[i] = e.transpose() * (gamma[i] - gamma_ref[i]) * e_inv_t;
  double sum = 0;
  for (int a = 0; a < n; ++a) {
    CMatrix acc = CMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) acc += e(i, a) * rotated[i];
    sum += acc.squaredNorm();
  }
  return sum;
}

Curvature curvature_tensor_fd(const RadialPotential& u, double s, double h) {
  const int n = u.dim();
  using Point = Eigen::VectorXcd;
  auto metric = [&](const Point& z) {
    const double r2 = z.squaredNorm();
    const PotentialJet j = u.jet(r2);
    CMatrix g(n, n);
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) g(k, l) = j[1] * (k == l ? 1.0 : 0.0) + j[2] * std::conj(z(k)) * z(l);
    return g;
  };
  Point z0 = Point::Zero(n);
  z0(0) = std::sqrt(s);
  // Real direction q in [0, 2n): x_q for q < n, y_{q-n} otherwise.
  auto dir = [&](int q) {
    Point e = Point::Zero(n);
    if (q < n)
      e(q) = 1.0;
    else
      e(q - n) = Complex<double>(0.0, 1.0);
    return e;
  };
  auto first = [&](int q, double step) {
    const Point e = dir(q);
    return ((metric(z0 + step * e) - metric(z0 - step * e)) / (2.0 * step)).eval();
  };
  auto second = [&](int p, int q, double step) {
    const Point ep = dir(p), eq = dir(q);
    return ((metric(z0 + step * (ep + eq)) - metric(z0 + step * (ep - eq)) - metric(z0 - step * (ep - eq)) +
             metric(z0 - step * (ep + eq))) /
            (4.0 * step * step))
        .eval();
  };
  auto richardson = [](const CMatrix& coarse, const CMatrix& fine) { return ((4.0 * fine - coarse) / 3.0).eval(); };

  std::vector<CMatrix> dx(2 * n);
  for (int q = 0; q < 2 * n; ++q) dx[q] = richardson(first(q, h), first(q, h / 2));
  const Complex<double> I(0.0, 1.0);
  std::vector<CMatrix> d(n), dbar(n);
  for (int i = 0; i < n; ++i) {
    d[i] = 0.5 * (dx[i] - I * dx[n + i]);
    dbar[i] = 0.5 * (dx[i] + I * dx[n + i]);
  }
  const CMatrix g = metric(z0);
  const CMatrix ginv = g.inverse();
  Curvature r(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      auto sd = [&](int p, int q) { return richardson(second(p, q, h), second(p, q, h / 2)); };
      // d_i d_jbar = (1/4)(dx_i - i dy_i)(dx_j + i dy_j)
      const CMatrix ddbar =
          0.25 * (sd(i, j) + sd(n + i, n + j) + I * (sd(i, n + j) - sd(n + i, j)));
      const CMatrix term = -ddbar + d[i] * ginv * dbar[j];
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) r(i, j, k, l) = term(k, l);
    }
  return r;
}

std::vector<double> hypothesis_grid(double s_max, int points) {
  if (points < 1) throw ArgumentError("hypothesis grid needs at least one point");
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) grid[i] = s_max * i / points;
  return grid;
}

HypothesisConstants hypothesis_constants(const RadialPotential& u, std::span<const double> grid,
                                         const HscSearch& search) {
  if (grid.empty()) throw ArgumentError("hypothesis_constants: empty grid");
  const int n = u.dim();
  HypothesisConstants out;
  double sup_h = -std::numeric_limits<double>::infinity();
  for (const double s : grid) {
    const PotentialJet j = u.jet(s);
    const Metric g = metric_at(n, j);
    const Curvature r = curvature_tensor_at(n, j);
    CurvatureSample sample;
    sample.s = s;
    sample.hsc_sup = hsc_sup_estimate(r, g, search);
    sample.hsc_inf = -hsc_sup_estimate(-1.0 * r, g, search);
    sample.norm = curvature_norm(r, g);
    sup_h = std::max(sup_h, sample.hsc_sup);
    out.b_est = std::max(out.b_est, sample.norm);
    out.samples.push_back(sample);
  }
  out.kappa_est = -sup_h;
  out.satisfied = out.kappa_est > 0.0;
  return out;
}

void require_hypothesis(const HypothesisConstants& h) {
  if (!h.satisfied) {
    std::ostringstream os;
    os << "hypothesis H <= -kappa violated (kappa_est = " << h.kappa_est << "); flow run refused unless --force";
    throw HypothesisError(os.str());
  }
}

}  // namespace krf
