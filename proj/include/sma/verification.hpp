#pragma once

// Brute-force oracles: finite-difference differentiation of the free energy and audits of
// the solvers' elastic-domain behaviour on random states.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "sma/energy.hpp"
#include "sma/evolution.hpp"

namespace sma {

struct FamilyResult {
  std::string name;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  int worst_sample = -1;
  int failures = 0;
  bool pass = true;
};

struct PropertyResult {
  std::string name;
  int checked = 0;
  int failures = 0;
  int first_failure = -1;  ///< sample index
  std::string detail;      ///< first failure, human-readable
  bool pass() const { return failures == 0; }
};

struct OracleReport {
  std::string kind;
  std::uint64_t seed = 0;
  int samples = 0;
  std::vector<FamilyResult> families;
  std::vector<PropertyResult> properties;

  bool pass() const;
  nlohmann::json to_json() const;
};

/// A random interior state as drawn by the oracles.
struct SampledPoint {
  Sym3 strain;
  double theta = 0.0;
  MaterialState state;
};

/// λ_i ∈ [0.05, 0.9] then normalized, uniform unit α, ‖ε‖ ≤ `max_strain`, κ ∈ [0, 0.02],
/// θ ∈ [-20, 60] °C, small deviatoric ε_pl.
SampledPoint sample_point(std::mt19937_64& rng, double max_strain = 0.05);

/// Per-sample generator; sample i of a run seeded with `seed` is reproducible on its own.
std::mt19937_64 sample_rng(std::uint64_t seed, int index);

struct GradientCheckSettings {
  double step = 1e-6;
  double rel_tol = 1e-6;
  double abs_floor = 1e-10;
};

/// Compares every analytic derivative of Ψ with Richardson-extrapolated central
/// differences of free_energy. Families: lambda, alpha (tangent space of the unit
/// sphere), eps_pl, kappa, strain.
OracleReport fd_gradient_check(int samples, std::uint64_t seed, const MaterialParams& p = {},
                               const GradientCheckSettings& g = {});

/// Strain bound for elastic_domain_check samples.
inline constexpr double kElasticCheckMaxStrain = 0.01;

/// Solver settings for auditing random states. These start far from any equilibrium reached along a
/// loading path (fractions and orientation are drawn independently of strain), and the λ-α
/// fixed-point loop can need a few dozen passes to settle, so that budget is raised.
SolverSettings oracle_solver_settings();

/// For random states: when no flow function exceeds its gate, relax must return the state
/// unchanged; otherwise the relaxed state must meet the acceptance contract.
OracleReport elastic_domain_check(int samples, std::uint64_t seed, const MaterialParams& p = {},
                                  const SolverSettings& s = oracle_solver_settings());

}  // namespace sma
