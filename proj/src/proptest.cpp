#include "krf/proptest.hpp"

#include <iomanip>
#include <random>
#include <sstream>

#include "krf/numfmt.hpp"
#include "krf/random_instances.hpp"

namespace krf {

namespace {

struct Outcome {
  double violation = 0;
  bool failed = false;
};

using Instance = Outcome (*)(int n, std::uint64_t seed, const ProptestOptions& opts, std::ostream* dump);

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void dump_matrix(std::ostream& os, const char* name, const CMatrix& m) {
  os << name << " =\n" << std::setprecision(17) << m << '\n';
}

void dump_tensor(std::ostream& os, const char* name, const Curvature& r) {
  os << name << " (i j k l: value) =\n" << std::setprecision(17);
  const int n = r.dim();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) os << i << ' ' << j << ' ' << k << ' ' << l << ": " << r(i, j, k, l) << '\n';
}

Outcome royden_instance(int n, std::uint64_t seed, const ProptestOptions& opts, std::ostream* dump) {
  std::mt19937_64 rng(seed);
  const Metric g = random_metric<double>(rng, n);
  const Metric ghat = random_metric<double>(rng, n);
  const double kappa = std::uniform_real_distribution<double>(0.1, 3.0)(rng);
  const Curvature rhat = constant_hsc_curvature(ghat, kappa);
  const auto terms = royden_check(rhat, g, ghat, kappa, opts.rel_tol);
  const double v = (terms.lhs - terms.rhs) / std::abs(terms.rhs);
  if (dump) {
    dump_matrix(*dump, "g", g.matrix());
    dump_matrix(*dump, "ghat", ghat.matrix());
    *dump << "kappa = " << kappa << "\nlhs = " << terms.lhs << "\nrhs = " << terms.rhs << '\n';
  }
  return {v, !terms.holds};
}

template <typename Scalar>
double condition_number(const MetricForm<Scalar>& g) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix<Scalar>> es(g.matrix(), Eigen::EigenvaluesOnly);
  return static_cast<double>(es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff());
}

// g = lambda ghat must give equality with the closed form; for n >= 2 a
// generic g must not. Evaluated in long double: in double the contraction
// error grows like cond(ghat) * eps and reaches ~2e-12 for the worst draws.
Outcome royden_equality_instance(int n, std::uint64_t seed, const ProptestOptions& opts, std::ostream* dump) {
  using Real = long double;
  std::mt19937_64 rng(seed);
  const MetricForm<Real> ghat = random_metric<Real>(rng, n);
  const Real kappa = std::uniform_real_distribution<Real>(0.1L, 3.0L)(rng);
  const Real lambda = std::uniform_real_distribution<Real>(0.2L, 5.0L)(rng);
  const MetricForm<Real> g(lambda * ghat.matrix());
  const CurvatureTensor<Real> rhat = constant_hsc_curvature(ghat, kappa);
  const auto eq = royden_check(rhat, g, ghat, kappa, static_cast<Real>(opts.rel_tol));
  const Real closed = -kappa * n * (n + 1) / (2 * lambda * lambda);
  double v = static_cast<double>(
      std::max(std::abs(eq.lhs - eq.rhs), std::max(std::abs(eq.lhs - closed), std::abs(eq.rhs - closed))) /
      std::abs(closed));
  bool failed = v > opts.equality_tol;
  double gap = 0;
  if (n >= 2) {
    const MetricForm<Real> other = random_metric<Real>(rng, n);
    const auto strict = royden_check(rhat, other, ghat, kappa, static_cast<Real>(opts.rel_tol));
    gap = static_cast<double>((strict.rhs - strict.lhs) / std::abs(strict.rhs));
    if (!(gap > opts.equality_tol)) {
      failed = true;
      v = std::max(v, opts.equality_tol - gap);
    }
  }
  if (dump) {
    *dump << std::setprecision(21) << "ghat =\n" << ghat.matrix() << "\ncond(ghat) = " << condition_number(ghat)
          << "\nkappa = " << kappa << "\nlambda = " << lambda << "\nlhs = " << eq.lhs << "\nrhs = " << eq.rhs
          << "\nclosed_form = " << closed << "\ngeneric_gap = " << gap << '\n';
  }
  return {v, failed};
}

Outcome yau_instance(int n, std::uint64_t seed, const ProptestOptions& opts, std::ostream* dump) {
  std::mt19937_64 rng(seed);
  const Metric g = random_metric<double>(rng, n);
  const Metric ghat = random_metric<double>(rng, n);
  const FirstJet<double> a = random_first_jet<double>(rng, n);
  const auto terms = yau_identity_terms(g, ghat, a);
  const double v = (terms.lhs - terms.rhs) / (1.0 + terms.rhs);
  if (dump) {
    dump_matrix(*dump, "g", g.matrix());
    dump_matrix(*dump, "ghat", ghat.matrix());
    *dump << "lhs = " << terms.lhs << "\nrhs = " << terms.rhs << '\n';
  }
  return {v, v > opts.rel_tol || terms.lhs < 0 || terms.rhs < 0};
}

// A(k, a, b) = c_k g_{a bbar}: the Cauchy-Schwarz equality case. It is
// symmetric in (k, a) only for n = 1, so the jet check is skipped.
Outcome yau_equality_instance(int n, std::uint64_t seed, const ProptestOptions& opts, std::ostream* dump) {
  std::mt19937_64 rng(seed);
  const Metric g = random_metric<double>(rng, n);
  const Metric ghat = random_metric<double>(rng, n);
  const CMatrix c = random_complex_matrix<double>(rng, n, 1);
  FirstJet<double> a(n);
  for (int k = 0; k < n; ++k)
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) a(k, p, q) = c(k, 0) * g.lower(p, q);
  const auto terms = yau_identity_terms(g, ghat, a, false);
  double cnorm = 0;
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) cnorm += std::real(g.upper(k, l) * c(k, 0) * std::conj(c(l, 0)));
  const double v =
      std::max(std::abs(terms.lhs - terms.rhs), std::abs(terms.lhs - cnorm)) / (1.0 + std::abs(terms.rhs));
  if (dump) {
    dump_matrix(*dump, "g", g.matrix());
    dump_matrix(*dump, "ghat", ghat.matrix());
    dump_matrix(*dump, "c", c);
    *dump << "lhs = " << terms.lhs << "\nrhs = " << terms.rhs << "\n|c|^2 = " << cnorm << '\n';
  }
  return {v, v > opts.rel_tol};
}

// Eigenvalues with prod <= C and 1/lambda_i <= C, including the extreme
// configuration, never exceed C^n.
Outcome sandwich_instance(int n, std::uint64_t seed, const ProptestOptions& opts, std::ostream* dump) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double c = std::exp(unit(rng) * 3.0);
  const double logc = std::log(c);
  // log lambda_i = -log C + u_i, u_i >= 0, sum u_i <= (n + 1) log C.
  std::vector<double> u(n);
  double sum = 0;
  for (auto& x : u) sum += (x = -std::log(1.0 - unit(rng)));
  const bool extreme = unit(rng) < 0.1;
  const double budget = (n + 1) * logc * (extreme ? 1.0 : unit(rng));
  double worst = 0, prod = 1;
  for (int i = 0; i < n; ++i) {
    const double share = extreme ? (i == 0 ? 1.0 : 0.0) : u[i] / sum;
    const double lambda = std::exp(-logc + share * budget);
    worst = std::max(worst, lambda);
    prod *= lambda;
  }
  const double bound = eigen_sandwich_bound(c, n);
  const double v = (worst - bound) / bound;
  if (dump) *dump << "C = " << c << "\nmax lambda = " << worst << "\nprod = " << prod << "\nbound = " << bound << '\n';
  return {v, v > opts.rel_tol};
}

Curvature broken_curvature(std::mt19937_64& rng, int n) {
  Curvature r = random_curvature<double>(rng, n);
  std::uniform_int_distribution<int> idx(0, n - 1);
  const int i = idx(rng), j = idx(rng), k = idx(rng), l = idx(rng);
  r(i, j, k, l) += Complex<double>(0.5, 0.5);
  return r;
}

Outcome symmetry_rejection_instance(int n, std::uint64_t seed, const ProptestOptions&, std::ostream* dump) {
  std::mt19937_64 rng(seed);
  const Curvature r = broken_curvature(rng, n);
  bool rejected = false;
  try {
    r.validate();
  } catch (const InvariantError&) {
    rejected = true;
  }
  if (n >= 2) {
    FirstJet<double> a = random_first_jet<double>(rng, n);
    a(0, 1, 0) += 0.5;
    try {
      a.validate();
      rejected = false;
    } catch (const InvariantError&) {
    }
  }
  if (dump) {
    dump_tensor(*dump, "R", r);
    *dump << "symmetry_defect = " << r.symmetry_defect() << "\nrejected = " << (rejected ? "true" : "false") << '\n';
  }
  return {rejected ? 0.0 : 1.0, !rejected};
}

Outcome planted_instance(int n, std::uint64_t seed, const ProptestOptions& opts, std::ostream* dump) {
  std::mt19937_64 rng(seed);
  const Metric g = random_metric<double>(rng, n);
  const Metric ghat = random_metric<double>(rng, n);
  const Curvature rhat = constant_hsc_curvature(ghat, 1.0) + broken_curvature(rng, n);
  if (dump) {
    dump_matrix(*dump, "g", g.matrix());
    dump_matrix(*dump, "ghat", ghat.matrix());
    dump_tensor(*dump, "Rhat", rhat);
    *dump << "symmetry_defect = " << rhat.symmetry_defect() << '\n';
  }
  try {
    const auto terms = royden_check(rhat, g, ghat, 1.0, opts.rel_tol);
    return {(terms.lhs - terms.rhs) / std::abs(terms.rhs), !terms.holds};
  } catch (const InvariantError&) {
    return {rhat.symmetry_defect(), true};
  }
}

Instance lookup(const std::string& suite) {
  if (suite == "royden") return royden_instance;
  if (suite == "royden_equality") return royden_equality_instance;
  if (suite == "yau") return yau_instance;
  if (suite == "yau_equality") return yau_equality_instance;
  if (suite == "sandwich") return sandwich_instance;
  if (suite == "symmetry_rejection") return symmetry_rejection_instance;
  if (suite == "planted_violation") return planted_instance;
  throw ArgumentError("unknown property suite '" + suite + "'");
}

SuiteSummary run_suite(const std::string& name, int n, const ProptestOptions& opts) {
  if (n < 1) throw ArgumentError("suite dimension must be >= 1");
  const Instance instance = lookup(name);
  SuiteSummary s;
  s.name = name;
  s.n = n;
  s.samples = std::max(0L, opts.samples);
  for (long i = 0; i < s.samples; ++i) {
    const std::uint64_t seed = instance_seed(opts.seed, name, n, i);
    const Outcome o = instance(n, seed, opts, nullptr);
    s.max_violation = i == 0 ? o.violation : std::max(s.max_violation, o.violation);
    if (o.failed) {
      ++s.failures;
      s.failing_seeds.push_back(seed);
    }
  }
  return s;
}

}  // namespace

std::string SuiteSummary::line() const {
  return "suite=" + name + " n=" + std::to_string(n) + " samples=" + std::to_string(samples) +
         " failures=" + std::to_string(failures) + " max_violation=" + sig17(max_violation);
}

std::uint64_t instance_seed(std::uint64_t base, const std::string& suite, int n, long i) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (const unsigned char ch : suite) h = (h ^ ch) * 0x100000001b3ULL;
  return splitmix64(splitmix64(base ^ h) + (static_cast<std::uint64_t>(n) << 48) + static_cast<std::uint64_t>(i));
}

SuiteSummary royden_suite(int n, const ProptestOptions& o) { return run_suite("royden", n, o); }
SuiteSummary royden_equality_suite(int n, const ProptestOptions& o) { return run_suite("royden_equality", n, o); }
SuiteSummary yau_suite(int n, const ProptestOptions& o) { return run_suite("yau", n, o); }
SuiteSummary yau_equality_suite(int n, const ProptestOptions& o) { return run_suite("yau_equality", n, o); }
SuiteSummary sandwich_suite(int n, const ProptestOptions& o) { return run_suite("sandwich", n, o); }
SuiteSummary symmetry_rejection_suite(int n, const ProptestOptions& o) {
  return run_suite("symmetry_rejection", n, o);
}
SuiteSummary planted_suite(int n, const ProptestOptions& o) { return run_suite("planted_violation", n, o); }

std::string replay_instance(const std::string& suite, int n, std::uint64_t seed) {
  std::ostringstream os;
  os << "suite = " << suite << "\nn = " << n << "\nseed = " << seed << '\n';
  const Outcome o = lookup(suite)(n, seed, ProptestOptions{}, &os);
  os << "violation = " << sig17(o.violation) << "\nfailed = " << (o.failed ? "true" : "false") << '\n';
  return os.str();
}

long ProptestReport::total_failures() const {
  long f = 0;
  for (const auto& s : suites) f += s.failures;
  return f;
}

ProptestReport run_property_suites(const ProptestOptions& opts) {
  ProptestReport report;
  report.vacuous = opts.samples <= 0;
  for (const char* name : {"royden", "royden_equality", "yau", "yau_equality", "sandwich", "symmetry_rejection"})
    for (const int n : opts.dims) report.suites.push_back(run_suite(name, n, opts));
  if (opts.plant_violation)
    for (const int n : opts.dims) {
      ProptestOptions planted = opts;
      planted.samples = std::max(1L, std::min(opts.samples, 10L));
      report.suites.push_back(run_suite("planted_violation", n, planted));
    }
  return report;
}

}  // namespace krf
