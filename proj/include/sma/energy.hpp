#pragma once

// Helmholtz free energy of the austenite / three-variant martensite mixture, its partial
// derivatives, the projected driving forces and the three flow criteria.

#include <array>

#include "sma/material_state.hpp"
#include "sma/tensor.hpp"

namespace sma {

/// How the constraint sum(λ) = 1 is projected out of the volume-fraction driving force.
enum class LambdaProjection {
  /// p̄ = -∂Ψ/∂λ + 1 (1/4) Σ_i (∂Ψ/∂λ_i) λ_i   (fraction-weighted mean)
  Verbatim,
  /// p̄ = -∂Ψ/∂λ + 1 (1/4) Σ_i ∂Ψ/∂λ_i        (exact projection, p̄ · 1 = 0)
  UnweightedMean,
};

/// Material constants. Defaults are the reference NiTi parameter set (MPa, °C).
struct MaterialParams {
  double young_austenite = 83000.0;
  double young_martensite = 40000.0;
  double poisson_austenite = 0.35;
  double poisson_martensite = 0.35;

  /// c_austenite(θ) = c0 + c1 θ; c_martensite is constant.
  double caloric_austenite_c0 = -3.2465;
  double caloric_austenite_c1 = -0.51;
  double caloric_martensite = 0.0;

  double eta_hat = 0.055;
  double nu_hat = 0.45;

  double hardening_k0 = 40000.0;
  double hardening_k1 = 1000.0;
  double hardening_k2 = 300.0;

  double penalty = 5e-6;

  double r_lambda = 5.92;
  double r_alpha = 1.0;
  double r_plastic = 750.0;

  LambdaProjection lambda_projection = LambdaProjection::UnweightedMean;

  /// Throws ValidationError on non-physical values.
  void validate() const;

  std::array<IsoStiffness, 4> phase_stiffness() const;
  Vec4 caloric(double theta) const;
};

/// Quantities shared by the energy, its derivatives and the stress update.
struct Kinematics {
  Mat3 rotation;         ///< Q(α)
  Sym3 eta_bar;          ///< Σ λ_i η_i (lattice frame)
  Sym3 eta_rotated;      ///< Qᵀ η̄ Q
  IsoStiffness c_bar;    ///< Reuss mixture
  Sym3 elastic_strain;   ///< ε - Qᵀ η̄ Q - ε_pl
  Sym3 stress;           ///< C̄ : e_el
};

Kinematics kinematics(const Sym3& strain, const MaterialState& state, const MaterialParams& p);

double hardening_energy(double kappa, const MaterialParams& p);
/// μ = ∂Ψ_h/∂κ
double hardening_stress(double kappa, const MaterialParams& p);
/// Σ_i Λ / (λ_i² (1 - λ_i)²); throws DomainError when any λ_i is at 0 or 1.
double penalty_energy(const Vec4& lambda, const MaterialParams& p);
/// Λ (2 - 4λ) / (λ³ (λ - 1)³) for one phase.
double penalty_derivative(double lambda, const MaterialParams& p);

double free_energy(const Sym3& strain, double theta, const MaterialState& state, const MaterialParams& p);
/// Same with the volume fractions taken as given, without closing their sum.
double free_energy(const Sym3& strain, double theta, const Vec4& lambda, const Quat& alpha, const Sym3& eps_pl,
                   double kappa, const MaterialParams& p);

struct EnergyGradient {
  Vec4 d_lambda{};
  Vec4 d_alpha{};
  Sym3 d_eps_pl;
  double d_kappa = 0.0;
  Sym3 stress;  ///< ∂Ψ/∂ε
};

EnergyGradient d_free_energy(const Sym3& strain, double theta, const MaterialState& state,
                             const MaterialParams& p);

struct DrivingForces {
  Vec4 p_lambda{};
  Vec4 p_alpha{};
  Sym3 dev_stress;
  double mu = 0.0;
};

/// Projected forces from an already evaluated gradient.
DrivingForces project_forces(const EnergyGradient& g, const MaterialState& state, const MaterialParams& p);

DrivingForces driving_forces(const Sym3& strain, double theta, const MaterialState& state,
                             const MaterialParams& p);

struct YieldValues {
  double lambda = 0.0;
  double alpha = 0.0;
  double plastic = 0.0;
};

YieldValues yield_functions(const DrivingForces& f, const MaterialParams& p);

double norm(const Vec4& v);
double dot(const Vec4& a, const Vec4& b);

}  // namespace sma
