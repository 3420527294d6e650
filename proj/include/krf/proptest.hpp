#pragma once

// Randomized property suites over the pointwise algebra: Royden's contraction
// inequality, Yau's Cauchy-Schwarz step, the eigenvalue sandwich, and
// rejection of tensors that break a Kahler symmetry.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace krf {

struct SuiteSummary {
  std::string name;
  int n = 0;
  long samples = 0;
  long failures = 0;
  double max_violation = 0;
  std::vector<std::uint64_t> failing_seeds;

  /// suite=<name> n=<dim> samples=<k> failures=<k> max_violation=<float>
  std::string line() const;
};

struct ProptestOptions {
  std::uint64_t seed = 0;
  long samples = 10000;
  std::vector<int> dims{1, 2, 3};
  /// Adds a suite whose tensor lacks a symmetry; it must fail.
  bool plant_violation = false;
  double rel_tol = 1e-10;
  double equality_tol = 1e-12;
};

/// Seed of instance i of `suite` in dimension n; instances are independent.
std::uint64_t instance_seed(std::uint64_t base, const std::string& suite, int n, long i);

SuiteSummary royden_suite(int n, const ProptestOptions& opts);
SuiteSummary royden_equality_suite(int n, const ProptestOptions& opts);
SuiteSummary yau_suite(int n, const ProptestOptions& opts);
SuiteSummary yau_equality_suite(int n, const ProptestOptions& opts);
SuiteSummary sandwich_suite(int n, const ProptestOptions& opts);
SuiteSummary symmetry_rejection_suite(int n, const ProptestOptions& opts);
/// Royden check fed a tensor with one broken symmetry; every instance fails.
SuiteSummary planted_suite(int n, const ProptestOptions& opts);

/// Runs a suite by name on one instance seed and returns a human-readable
/// dump of the inputs and both sides.
std::string replay_instance(const std::string& suite, int n, std::uint64_t seed);

struct ProptestReport {
  std::vector<SuiteSummary> suites;
  bool vacuous = false;
  long total_failures() const;
};

ProptestReport run_property_suites(const ProptestOptions& opts);

}  // namespace krf
