#pragma once

// Rate-independent update of the internal variables for one load increment.
//
// Each channel (volume fractions, orientation, plastic strain) is driven back to its flow
// surface by Newton iterations on the channel's consistency parameter ρ. The step
// direction is the projected driving force at the current iterate; dφ/dρ is taken by
// central differences along a trial update. The inexact analytic Lagrange multipliers are
// corrected afterwards: volume fractions are renormalized, the Euler-Rodrigues
// parameters are pulled back onto the unit sphere by a bisection on β.

#include <string>

#include "sma/energy.hpp"
#include "sma/errors.hpp"
#include "sma/material_state.hpp"

namespace sma {

struct SolverSettings {
  /// Flow-function tolerances relative to the dissipation radii.
  double t_lambda_rel = 1e-6;
  double t_alpha_rel = 1e-6;
  double t_plastic_rel = 1e-6;
  /// |‖α‖² - 1|
  double t_alpha_beta = 1e-10;
  double delta_alpha_max = 0.05;
  int max_iterations = 200;
  int max_outer_passes = 20;
  double bisection_tol = 1e-12;
  int bisection_max_iterations = 200;
  int bracket_max_doublings = 60;
  /// FD step for dφ/dρ (norm of the internal-variable change) and for the λ Hessian.
  double fd_step = 1e-8;
  /// Interior guard for volume fractions.
  double lambda_min = 1e-6;
  /// Step halvings allowed in the Newton line searches.
  int max_backtracks = 30;

  double t_lambda(const MaterialParams& p) const { return t_lambda_rel * p.r_lambda; }
  double t_alpha(const MaterialParams& p) const { return t_alpha_rel * p.r_alpha; }
  double t_plastic(const MaterialParams& p) const { return t_plastic_rel * p.r_plastic; }

  /// Throws ValidationError unless every field is positive.
  void validate() const;
};

struct ChannelReport {
  int iterations = 0;
  double residual = 0.0;  ///< φ after the last iteration
  bool evolved = false;
};

struct StepReport {
  ChannelReport lambda;
  ChannelReport alpha;
  ChannelReport plastic;
  int outer_passes = 0;
  double alpha_constraint = 0.0;  ///< |‖α‖² - 1| at exit
  double lambda_sum = 0.0;        ///< |Σλ - 1| before the final renormalization
  bool scaled_step = false;
  bool bisection = false;
  bool damping = false;
  int lambda_clamps = 0;
  int newton_fallbacks = 0;

  /// Adds counters and flags of `other`; residuals of `other` replace ours for channels
  /// it touched.
  void merge(const StepReport& other);
};

/// Solver failure; carries the report of the increment that failed.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, StepReport report) : Error(what), report_(report) {}
  const StepReport& report() const { return report_; }

 private:
  StepReport report_;
};

/// β-bracketing failed while restoring ‖α‖ = 1.
class BracketError : public ConvergenceError {
 public:
  using ConvergenceError::ConvergenceError;
};

/// Scale factor for the next consistency-parameter step: halves `previous_scale` when φ
/// changed sign between iterations without dropping by at least 10 %, returns 1 when |φ|
/// decreased, and keeps `previous_scale` otherwise.
double damp_oscillation(double phi_previous, double phi_current, double previous_scale = 1.0);

struct AlphaUpdate {
  Quat alpha;
  StepReport report;
};

/// With `active` set the solver also runs when φ < -t_α, pulling a channel that already
/// moved in this increment back onto its flow surface.
AlphaUpdate evolve_alpha(const Sym3& strain, double theta, const MaterialState& state,
                         const MaterialParams& p, const SolverSettings& s, bool active = false);

struct LambdaUpdate {
  PhaseFractions fractions;
  StepReport report;
};

/// Implicit return for the phase fractions, anchored at `start` (the fractions at the start of
/// the increment). Minimises Ψ(λ) + r_λ‖λ - start‖ over Σλ = 1, so the result satisfies
/// λ - start = ρ p̄_λ(λ) with ρ ≥ 0 and ‖p̄_λ(λ)‖ = r_λ. Returns `start` unchanged if φ_λ ≤ t_λ
/// there. The remaining state (strain split, α, ε_pl) is taken from `state`, whose fractions
/// seed the Newton iteration.
LambdaUpdate evolve_lambda(const Sym3& strain, double theta, const MaterialState& state,
                           const MaterialParams& p, const SolverSettings& s, const PhaseFractions& start);

/// Same, anchored at `state.fractions`.
LambdaUpdate evolve_lambda(const Sym3& strain, double theta, const MaterialState& state,
                           const MaterialParams& p, const SolverSettings& s);

struct PlasticUpdate {
  Sym3 eps_pl;
  double kappa = 0.0;
  StepReport report;
};

/// Plastic return along dev σ. κ is slaved to the total plastic strain change measured
/// from (`eps_pl_start`, `kappa_start`), the values at the start of the increment.
PlasticUpdate evolve_plastic(const Sym3& strain, double theta, const MaterialState& state,
                             const MaterialParams& p, const SolverSettings& s, const Sym3& eps_pl_start,
                             double kappa_start, bool active = false);

/// Same, with the increment starting at `state`.
PlasticUpdate evolve_plastic(const Sym3& strain, double theta, const MaterialState& state,
                             const MaterialParams& p, const SolverSettings& s);

struct RelaxResult {
  MaterialState state;
  StepReport report;
};

/// Runs plastic, volume-fraction and orientation solvers in turn until no flow function
/// exceeds its gate and every channel that moved sits on its flow surface (|φ| ≤ t).
/// Throws ConvergenceError after `max_outer_passes`.
RelaxResult relax(const Sym3& strain, double theta, const MaterialState& state, const MaterialParams& p,
                  const SolverSettings& s);

}  // namespace sma
