#include "sma/energy.hpp"

#include <cmath>

#include "sma/errors.hpp"

namespace sma {

void MaterialParams::validate() const {
  const auto require = [](bool ok, const char* what) {
    if (!ok) throw ValidationError(what);
  };
  require(young_austenite > 0.0 && young_martensite > 0.0, "Young's moduli must be positive");
  require(poisson_austenite > 0.0 && poisson_austenite < 0.5, "nu_austenite must lie in (0, 0.5)");
  require(poisson_martensite > 0.0 && poisson_martensite < 0.5, "nu_martensite must lie in (0, 0.5)");
  require(penalty > 0.0, "penalty constant must be positive");
  require(r_lambda > 0.0 && r_alpha > 0.0 && r_plastic > 0.0, "dissipation radii must be positive");
  require(hardening_k2 > 0.0, "hardening k2 must be positive");
  require(eta_hat >= 0.0, "eta_hat must be non-negative");
}

std::array<IsoStiffness, 4> MaterialParams::phase_stiffness() const {
  const auto aust = IsoStiffness::from_young_poisson(young_austenite, poisson_austenite);
  const auto mart = IsoStiffness::from_young_poisson(young_martensite, poisson_martensite);
  return {aust, mart, mart, mart};
}

Vec4 MaterialParams::caloric(double theta) const {
  return {caloric_austenite_c0 + caloric_austenite_c1 * theta, caloric_martensite, caloric_martensite,
          caloric_martensite};
}

double norm(const Vec4& v) { return std::sqrt(dot(v, v)); }

double dot(const Vec4& a, const Vec4& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]; }

Kinematics kinematics(const Sym3& strain, const MaterialState& state, const MaterialParams& p) {
  const auto phases = p.phase_stiffness();
  const Vec4& lambda = state.fractions.lambda();

  Kinematics k;
  k.rotation = rotation_from_quat(state.alpha);
  k.eta_bar = effective_eta(lambda, p.eta_hat, p.nu_hat);
  k.eta_rotated = rotate_transposed(k.rotation, k.eta_bar);
  k.c_bar = reuss_effective(lambda, phases);
  k.elastic_strain = strain - k.eta_rotated - state.eps_pl;
  k.stress = k.c_bar.apply(k.elastic_strain);
  return k;
}

double hardening_energy(double kappa, const MaterialParams& p) {
  const double k0 = p.hardening_k0, k1 = p.hardening_k1, k2 = p.hardening_k2;
  return 0.5 * k1 * kappa * kappa - (k1 - k0) / k2 * (std::exp(-k2 * kappa) / k2 + kappa);
}

double hardening_stress(double kappa, const MaterialParams& p) {
  const double k0 = p.hardening_k0, k1 = p.hardening_k1, k2 = p.hardening_k2;
  return k1 * kappa + (k1 - k0) / k2 * std::expm1(-k2 * kappa);
}

double penalty_energy(const Vec4& lambda, const MaterialParams& p) {
  double e = 0.0;
  for (double l : lambda) {
    if (!(l > 0.0) || !(l < 1.0)) throw DomainError("penalty energy is singular at volume fractions 0 and 1");
    const double w = l * (1.0 - l);
    e += p.penalty / (w * w);
  }
  return e;
}

double penalty_derivative(double lambda, const MaterialParams& p) {
  if (!(lambda > 0.0) || !(lambda < 1.0)) {
    throw DomainError("penalty energy is singular at volume fractions 0 and 1");
  }
  const double m = lambda - 1.0;
  return p.penalty * (2.0 - 4.0 * lambda) / (lambda * lambda * lambda * m * m * m);
}

double free_energy(const Sym3& strain, double theta, const Vec4& lambda, const Quat& alpha, const Sym3& eps_pl,
                   double kappa, const MaterialParams& p) {
  const double pen = penalty_energy(lambda, p);
  const Mat3 q = rotation_from_quat(alpha);
  const IsoStiffness c = reuss_effective(lambda, p.phase_stiffness());
  const Sym3 e = strain - rotate_transposed(q, effective_eta(lambda, p.eta_hat, p.nu_hat)) - eps_pl;
  const double caloric = dot(lambda, p.caloric(theta));
  return 0.5 * ddot(e, c.apply(e)) + caloric + hardening_energy(kappa, p) + pen;
}

double free_energy(const Sym3& strain, double theta, const MaterialState& state, const MaterialParams& p) {
  return free_energy(strain, theta, state.fractions.lambda(), state.alpha, state.eps_pl, state.kappa, p);
}

EnergyGradient d_free_energy(const Sym3& strain, double theta, const MaterialState& state,
                             const MaterialParams& p) {
  const Vec4& lambda = state.fractions.lambda();
  const Kinematics k = kinematics(strain, state, p);
  const auto phases = p.phase_stiffness();
  const Vec4 c = p.caloric(theta);

  EnergyGradient g;
  g.stress = k.stress;
  g.d_eps_pl = -k.stress;
  g.d_kappa = hardening_stress(state.kappa, p);

  for (int i = 0; i < kPhaseCount; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const Sym3 eta_i = rotate_transposed(k.rotation, variant_strain(i, p.eta_hat, p.nu_hat));
    const double reuss = ddot(k.stress, phases[ui].apply_inverse(k.stress));
    g.d_lambda[ui] = penalty_derivative(lambda[ui], p) + c[ui] - ddot(eta_i, k.stress) - 0.5 * reuss;
  }

  // -2 [η̄ · Q · σ] : ∂Q/∂α_j
  const Mat3 lever = Mat3::from_sym(k.eta_bar) * k.rotation * Mat3::from_sym(k.stress);
  const auto dq = d_rotation_d_quat(state.alpha);
  for (std::size_t j = 0; j < 4; ++j) g.d_alpha[j] = -2.0 * ddot(lever, dq[j]);
  return g;
}

DrivingForces project_forces(const EnergyGradient& g, const MaterialState& state, const MaterialParams& p) {
  const Vec4& lambda = state.fractions.lambda();
  const Vec4& alpha = state.alpha.v;

  double mean = 0.0;
  if (p.lambda_projection == LambdaProjection::Verbatim) {
    mean = dot(g.d_lambda, lambda) / kPhaseCount;
  } else {
    mean = (((g.d_lambda[0] + g.d_lambda[1]) + g.d_lambda[2]) + g.d_lambda[3]) / kPhaseCount;
  }
  const double along = dot(g.d_alpha, alpha);

  DrivingForces f;
  for (std::size_t i = 0; i < 4; ++i) {
    f.p_lambda[i] = -g.d_lambda[i] + mean;
    f.p_alpha[i] = -g.d_alpha[i] + along * alpha[i];
  }
  f.dev_stress = dev(-g.d_eps_pl);
  f.mu = g.d_kappa;
  return f;
}

DrivingForces driving_forces(const Sym3& strain, double theta, const MaterialState& state,
                             const MaterialParams& p) {
  return project_forces(d_free_energy(strain, theta, state, p), state, p);
}

YieldValues yield_functions(const DrivingForces& f, const MaterialParams& p) {
  return {norm(f.p_lambda) - p.r_lambda, norm(f.p_alpha) - p.r_alpha,
          norm(f.dev_stress) - (p.r_plastic + f.mu)};
}

}  // namespace sma
