#include "sma/material_point.hpp"

#include <algorithm>
#include <cmath>

namespace sma {

Quat initialize_orientation(const Sym3& strain) {
  const EigenSystem es = jacobi_eigen(strain);
  const double scale = std::max({std::abs(es.values[0]), std::abs(es.values[1]), std::abs(es.values[2])});
  if (scale == 0.0 || es.values[0] - es.values[2] <= 1e-12 * scale) return Quat{};
  // Variant k stretches along row k of Q, so Q = Vᵀ puts it on the k-th principal axis.
  return quat_from_rotation(transpose(es.vectors));
}

namespace {

Sym3 incremental_stress(const MaterialState& before, const MaterialState& after, const Sym3& strain_increment,
                        const MaterialParams& p) {
  const Mat3 q = rotation_from_quat(before.alpha);
  const Vec4& lam = before.fractions.lambda();
  const auto phases = p.phase_stiffness();
  const IsoStiffness c = reuss_effective(lam, phases);
  const Sym3 eta_bar = effective_eta(lam, p.eta_hat, p.nu_hat);
  const Sym3& sigma = before.stress;

  Sym3 d = c.apply(strain_increment - (after.eps_pl - before.eps_pl));

  const Vec4& lam_after = after.fractions.lambda();
  for (int i = 0; i < kPhaseCount; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const double dl = lam_after[ui] - lam[ui];
    if (dl == 0.0) continue;
    const Sym3 eta_i = rotate_transposed(q, variant_strain(i, p.eta_hat, p.nu_hat));
    d -= dl * c.apply(phases[ui].apply_inverse(sigma) + eta_i);
  }

  const auto dq = d_rotation_d_quat(before.alpha);
  const Mat3 eta_m = Mat3::from_sym(eta_bar);
  for (std::size_t j = 0; j < 4; ++j) {
    const double da = after.alpha.v[j] - before.alpha.v[j];
    if (da == 0.0) continue;
    const Sym3 d_eta = sym(transpose(dq[j]) * eta_m * q + transpose(q) * eta_m * dq[j]);
    d -= da * c.apply(d_eta);
  }
  return d;
}

}  // namespace

PointUpdate update_point(const PointInput& in, const MaterialState& state, const MaterialParams& p,
                         const SolverSettings& s) {
  MaterialState start = state;
  if (in.first_increment && !start.initialized) {
    start.alpha = initialize_orientation(in.strain);
    start.initialized = true;
  }

  PointUpdate out;
  out.tangent = reuss_effective(start.fractions.lambda(), p.phase_stiffness());

  RelaxResult r = relax(in.strain, in.theta, start, p, s);
  out.state = r.state;
  out.report = r.report;
  out.stress = kinematics(in.strain, out.state, p).stress;
  out.state.stress = out.stress;

  out.incremental_stress_increment = incremental_stress(start, out.state, in.strain_increment, p);
  const Sym3 gap = start.stress + out.incremental_stress_increment - out.stress;
  for (double g : gap.components()) out.drift = std::max(out.drift, std::abs(g));
  return out;
}

Equilibrium stress_free_equilibrium(const MaterialState& state, double theta, const MaterialParams& p,
                                    const SolverSettings& s) {
  constexpr int kMaxSweeps = 100;
  MaterialState work = state;
  for (int k = 0; k < kMaxSweeps; ++k) {
    const Sym3 strain = kinematics(Sym3{}, work, p).eta_rotated + work.eps_pl;
    const RelaxResult r = relax(strain, theta, work, p, s);
    if (r.report.outer_passes == 0) {
      work.stress = kinematics(strain, work, p).stress;
      return {strain, work};
    }
    work = r.state;
  }
  throw ConvergenceError("stress_free_equilibrium: no fixed point", StepReport{});
}

void pack_state(const MaterialState& state, std::span<double, kStateVariableCount> statev) {
  for (std::size_t i = 0; i < 4; ++i) statev[i] = state.fractions.chi()[i];
  for (std::size_t i = 0; i < 4; ++i) statev[4 + i] = state.alpha.v[i];
  for (std::size_t i = 0; i < 6; ++i) statev[8 + i] = state.eps_pl[i];
  statev[14] = state.kappa;
  statev[15] = state.initialized ? 1.0 : 0.0;
}

MaterialState unpack_state(std::span<const double, kStateVariableCount> statev) {
  MaterialState st;
  st.fractions = PhaseFractions::from_logits({statev[0], statev[1], statev[2], statev[3]});
  st.alpha = Quat(statev[4], statev[5], statev[6], statev[7]);
  for (std::size_t i = 0; i < 6; ++i) st.eps_pl[i] = statev[8 + i];
  st.kappa = statev[14];
  st.initialized = statev[15] != 0.0;
  return st;
}

namespace {

Sym3 from_engineering(std::span<const double, 6> v) {
  return {v[0], v[1], v[2], 0.5 * v[3], 0.5 * v[4], 0.5 * v[5]};
}

}  // namespace

void umat(std::span<double, 6> stress, std::span<double, kStateVariableCount> statev,
          std::span<double, 36> ddsdde, std::span<const double, 6> strain,
          std::span<const double, 6> strain_increment, double time_total, double time_increment,
          double temperature, double temperature_increment, const MaterialParams& p, const SolverSettings& s) {
  MaterialState st = unpack_state(statev);
  for (std::size_t i = 0; i < 6; ++i) st.stress[i] = stress[i];

  PointInput in;
  in.strain_increment = from_engineering(strain_increment);
  in.strain = from_engineering(strain) + in.strain_increment;
  in.theta = temperature + temperature_increment;
  in.time_increment = time_increment;
  in.first_increment = time_total == time_increment;

  const PointUpdate up = update_point(in, st, p, s);
  pack_state(up.state, statev);
  for (std::size_t i = 0; i < 6; ++i) stress[i] = up.stress[i];
  const auto c = up.tangent.voigt_matrix();
  std::copy(c.begin(), c.end(), ddsdde.begin());
}

}  // namespace sma
