#pragma once

// One material-point update: orientation seeding on the first increment, the
// yield-gated evolution of the internal variables, and the stress and tangent returned
// to the host.

#include <span>

#include "sma/energy.hpp"
#include "sma/evolution.hpp"
#include "sma/material_state.hpp"

namespace sma {

struct PointInput {
  Sym3 strain;          ///< ε at the end of the increment
  Sym3 strain_increment;
  double theta = 0.0;   ///< °C at the end of the increment
  double time_increment = 0.0;
  bool first_increment = false;
};

struct PointUpdate {
  MaterialState state;
  /// C̄ⁿ⁺¹ : e_el, also cached in state.stress.
  Sym3 stress;
  /// Explicit-Euler stress increment built from the partial derivatives at the start of
  /// the increment.
  Sym3 incremental_stress_increment;
  /// max_k |σⁿ + Δσ_incr - σⁿ⁺¹|_k
  double drift = 0.0;
  /// Algorithmic tangent, the effective stiffness at the start of the increment.
  IsoStiffness tangent;
  StepReport report;
};

/// Orientation whose variant axes coincide with the principal directions of `strain`,
/// largest principal strain on variant 1. Zero or isotropic strain gives [1, 0, 0, 0].
Quat initialize_orientation(const Sym3& strain);

/// Throws ConvergenceError (with the solver report) if an evolution solver fails.
PointUpdate update_point(const PointInput& in, const MaterialState& state, const MaterialParams& p,
                         const SolverSettings& s);

struct Equilibrium {
  Sym3 strain;  ///< material frame, stress-free
  MaterialState state;
};

/// Stress-free strain of `state` and the state relaxed there at `theta`, iterated until a
/// further relaxation takes no step. Preset phase mixtures are not equilibria in general
/// (the penalty keeps pushing small fractions), so a path starts from this instead.
/// Throws ConvergenceError if no fixed point is reached.
Equilibrium stress_free_equilibrium(const MaterialState& state, double theta, const MaterialParams& p,
                                    const SolverSettings& s);

/// Number of UMAT state variables: χ(4), α(4), ε_pl(6), κ, initialized flag.
inline constexpr int kStateVariableCount = 16;

/// ε_pl is stored with tensor (not engineering) shear components.
void pack_state(const MaterialState& state, std::span<double, kStateVariableCount> statev);
MaterialState unpack_state(std::span<const double, kStateVariableCount> statev);

/// Flat-array entry point following the UMAT calling convention.
///
/// `stress` holds σⁿ on entry and σⁿ⁺¹ on exit, order (11, 22, 33, 12, 13, 23). `strain`
/// is εⁿ; it and `strain_increment` use engineering shear (γ = 2ε₁₂). `ddsdde` receives the 6x6
/// tangent, row-major, engineering shear. The first increment is recognized by
/// `time_total == time_increment`; the host must have packed the initial phase state
/// into `statev` beforehand. Temperature at the end of the increment is
/// `temperature + temperature_increment`.
void umat(std::span<double, 6> stress, std::span<double, kStateVariableCount> statev,
          std::span<double, 36> ddsdde, std::span<const double, 6> strain,
          std::span<const double, 6> strain_increment, double time_total, double time_increment,
          double temperature, double temperature_increment, const MaterialParams& p, const SolverSettings& s);

}  // namespace sma
