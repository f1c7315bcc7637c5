#include <array>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "sma/material_point.hpp"

using namespace sma;

namespace {

const MaterialParams kParams;
const SolverSettings kSettings;

std::array<double, 6> engineering(const Sym3& e) { return {e[0], e[1], e[2], 2 * e[3], 2 * e[4], 2 * e[5]}; }

/// Austenite with δ = 0.008 sits strictly inside the λ elastic domain at 37 °C when stress free
/// (φ_λ ≈ -4.5 MPa). The δ = 0.01 preset does not.
MaterialState inside_austenite() {
  MaterialState st = MaterialState::austenitic(0.008);
  st.initialized = true;
  return st;
}

double reuss_young(const Vec4& l, const MaterialParams& p) {
  return 1.0 / (l[0] / p.young_austenite + (l[1] + l[2] + l[3]) / p.young_martensite);
}

}  // namespace

TEST(InitializeOrientation, AlignedStrainGivesIdentity) {
  EXPECT_EQ(initialize_orientation(Sym3::diagonal(0.001, 0, 0)), Quat{});
  EXPECT_EQ(initialize_orientation(Sym3{}), Quat{});
  EXPECT_EQ(initialize_orientation(0.002 * Sym3::identity()), Quat{});
}

TEST(InitializeOrientation, PureShearAlignsVariantOneAt45Degrees) {
  const Quat q = initialize_orientation(Sym3{0, 0, 0, 0.001, 0, 0});
  EXPECT_NEAR(q.norm_sq(), 1.0, 1e-14);
  const double t = std::numbers::pi / 4;
  const Mat3 rz({std::cos(t), -std::sin(t), 0, std::sin(t), std::cos(t), 0, 0, 0, 1});
  const Sym3 eta1 = variant_strain(1, kParams.eta_hat, kParams.nu_hat);
  const Sym3 got = rotate_transposed(rotation_from_quat(q), eta1);
  const Sym3 want = rotate(rz, eta1);
  for (std::size_t k = 0; k < 6; ++k) EXPECT_NEAR(got[k], want[k], 1e-15);
}

TEST(InitializeOrientation, VariantAxesFollowPrincipalDirections) {
  const Sym3 e{0.004, -0.001, 0.0005, 0.002, -0.0007, 0.0003};
  const Quat q = initialize_orientation(e);
  const EigenSystem es = jacobi_eigen(e);
  const Mat3 r = rotation_from_quat(q);
  // Qᵀ η_k Q has its long axis along eigenvector k.
  for (int k = 1; k <= 3; ++k) {
    const Sym3 m = rotate_transposed(r, variant_strain(k, 1.0, 0.0));
    const Vec3 v = es.vectors.column(k - 1);
    double vmv = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) vmv += v[static_cast<std::size_t>(i)] * m(i, j) * v[static_cast<std::size_t>(j)];
    EXPECT_NEAR(vmv, 1.0, 1e-12);
  }
}

TEST(StressFreeEquilibrium, PresetRelaxesOntoFlowSurface) {
  const MaterialState preset = MaterialState::austenitic();
  ASSERT_GT(yield_functions(driving_forces(kinematics(Sym3{}, preset, kParams).eta_rotated, 37, preset, kParams), kParams)
                .lambda,
            0.0);
  const Equilibrium eq = stress_free_equilibrium(preset, 37, kParams, kSettings);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(eq.state.stress[i], 0.0, 1e-9);
  const YieldValues y = yield_functions(driving_forces(eq.strain, 37, eq.state, kParams), kParams);
  EXPECT_LE(std::abs(y.lambda), kSettings.t_lambda(kParams));
  EXPECT_LT(y.alpha, 0.0);
  EXPECT_LT(y.plastic, 0.0);
  // Austenite grows until the dissipation radius stops it.
  EXPECT_GT(eq.state.fractions[0], preset.fractions[0]);
  const RelaxResult again = relax(eq.strain, 37, eq.state, kParams, kSettings);
  EXPECT_EQ(again.report.outer_passes, 0);
  EXPECT_EQ(again.state.fractions, eq.state.fractions);
}

TEST(StressFreeEquilibrium, InteriorStateIsKept) {
  const MaterialState st = inside_austenite();
  const Equilibrium eq = stress_free_equilibrium(st, 37, kParams, kSettings);
  EXPECT_EQ(eq.state.fractions, st.fractions);
  EXPECT_EQ(eq.strain, kinematics(Sym3{}, st, kParams).eta_rotated);
}

TEST(UpdatePoint, FixedPointWithoutIncrement) {
  MaterialState st = inside_austenite();
  const Kinematics k0 = kinematics(Sym3{}, st, kParams);
  PointInput in;
  in.strain = k0.eta_rotated;
  in.theta = 37;
  st.stress = kinematics(in.strain, st, kParams).stress;
  const PointUpdate u = update_point(in, st, kParams, kSettings);
  EXPECT_EQ(u.state.fractions, st.fractions);
  EXPECT_EQ(u.state.alpha, st.alpha);
  EXPECT_EQ(u.state.eps_pl, st.eps_pl);
  EXPECT_EQ(u.tangent.bulk(), k0.c_bar.bulk());
  EXPECT_EQ(u.tangent.shear(), k0.c_bar.shear());
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(u.stress[i], st.stress[i], 1e-12);
}

TEST(UpdatePoint, SmallAusteniteIncrementIsLinearElastic) {
  MaterialParams p = kParams;
  MaterialState st = inside_austenite();
  const Kinematics k0 = kinematics(Sym3{}, st, p);
  st.stress = Sym3{};
  const double nu = p.poisson_austenite;
  const Sym3 de{1e-5, -nu * 1e-5, -nu * 1e-5, 0, 0, 0};
  PointInput in{k0.eta_rotated + de, de, 37.0, 1.0, false};
  const PointUpdate u = update_point(in, st, p, kSettings);
  EXPECT_FALSE(u.report.lambda.evolved);
  EXPECT_FALSE(u.report.plastic.evolved);
  const Sym3 expected = k0.c_bar.apply(de);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_NEAR(u.stress[i], expected[i], 1e-9);
    EXPECT_NEAR(u.incremental_stress_increment[i], expected[i], 1e-9);
  }
  // Uniaxial: the lateral stresses vanish and σ11/ε11 is the mixture's Young's modulus.
  EXPECT_NEAR(u.stress[1], 0.0, 1e-9);
  EXPECT_NEAR(u.stress[0] / de[0], k0.c_bar.young(), 1e-6);
  EXPECT_NEAR(k0.c_bar.young(), reuss_young(st.fractions.lambda(), p), 1e-8);
}

TEST(UpdatePoint, ElasticTangentMatchesFiniteDifference) {
  MaterialState st = inside_austenite();
  st.alpha = Quat(std::cos(0.3), 0.0, std::sin(0.3), 0.0);
  const Sym3 e0 = kinematics(Sym3{}, st, kParams).eta_rotated;
  st.stress = kinematics(e0, st, kParams).stress;
  const double h = 1e-7;
  for (std::size_t j = 0; j < 6; ++j) {
    Sym3 de;
    de[j] = h;
    const PointUpdate up = update_point({e0 + de, de, 37.0, 1.0, false}, st, kParams, kSettings);
    const PointUpdate dn = update_point({e0 - de, -de, 37.0, 1.0, false}, st, kParams, kSettings);
    ASSERT_FALSE(up.report.lambda.evolved || dn.report.lambda.evolved);
    Sym3 unit;
    unit[j] = 1.0;
    const Sym3 col = up.tangent.apply(unit);
    for (std::size_t i = 0; i < 6; ++i) {
      const double fd = (up.stress[i] - dn.stress[i]) / (2 * h);
      EXPECT_NEAR(fd, col[i], 1e-6 * std::max(1.0, std::abs(col[i])));
    }
  }
}

TEST(UpdatePoint, ElasticLoadUnloadIsReversible) {
  MaterialState st = inside_austenite();
  const Sym3 e0 = kinematics(Sym3{}, st, kParams).eta_rotated;
  st.stress = kinematics(e0, st, kParams).stress;
  const Sym3 de{2e-4, -7e-5, -7e-5, 1e-4, 0, 0};
  const PointUpdate up = update_point({e0 + de, de, 37.0, 1.0, false}, st, kParams, kSettings);
  const PointUpdate back = update_point({e0, -de, 37.0, 1.0, false}, up.state, kParams, kSettings);
  EXPECT_EQ(back.state.fractions, st.fractions);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(back.stress[i], st.stress[i], 1e-10);
}

TEST(StateVariables, PackUnpackRoundTrip) {
  MaterialState st = MaterialState::with_fractions({0.4, 0.3, 0.2, 0.1});
  st.alpha = Quat(std::cos(0.2), std::sin(0.2), 0, 0);
  st.eps_pl = Sym3{1e-3, -4e-4, -6e-4, 2e-4, -1e-4, 3e-5};
  st.kappa = 0.0123;
  st.initialized = true;
  std::array<double, kStateVariableCount> statev{};
  pack_state(st, statev);
  const MaterialState back = unpack_state(statev);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(back.fractions.chi()[static_cast<std::size_t>(i)], st.fractions.chi()[static_cast<std::size_t>(i)], 1e-12);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(back.fractions[i], st.fractions[i], 1e-16);
  EXPECT_EQ(fraction_sum(back.fractions.lambda()), 1.0);
  EXPECT_EQ(back.alpha, st.alpha);
  EXPECT_EQ(back.eps_pl, st.eps_pl);
  EXPECT_EQ(back.kappa, st.kappa);
  EXPECT_TRUE(back.initialized);
}

TEST(Umat, FirstIncrementSeedsOrientationAndReturnsTangent) {
  std::array<double, kStateVariableCount> statev{};
  MaterialState init = inside_austenite();
  init.initialized = false;
  pack_state(init, statev);
  std::array<double, 6> stress{};
  std::array<double, 36> ddsdde{};
  const Sym3 e0 = kinematics(Sym3{}, init, kParams).eta_rotated;
  const Sym3 de{1e-4, 0, 0, 0, 0, 0};
  umat(stress, statev, ddsdde, engineering(e0), engineering(de), 1.0, 1.0, 37.0, 0.0, kParams, kSettings);
  const MaterialState st = unpack_state(statev);
  EXPECT_TRUE(st.initialized);
  EXPECT_EQ(st.alpha, Quat{});
  const IsoStiffness c = kinematics(Sym3{}, init, kParams).c_bar;
  const auto expected = c.voigt_matrix();
  for (std::size_t k = 0; k < 36; ++k) EXPECT_NEAR(ddsdde[k], expected[k], 1e-9);
  const Sym3 want = c.apply(de);
  for (std::size_t k = 0; k < 6; ++k) EXPECT_NEAR(stress[k], want[k], 1e-9);
}

TEST(Umat, EngineeringShearIsHalvedInternally) {
  std::array<double, kStateVariableCount> statev{};
  const MaterialState init = inside_austenite();
  pack_state(init, statev);
  std::array<double, 6> stress{};
  std::array<double, 36> ddsdde{};
  const Sym3 e0 = kinematics(Sym3{}, init, kParams).eta_rotated;
  const Sym3 de{0, 0, 0, 5e-5, 0, 0};
  umat(stress, statev, ddsdde, engineering(e0), engineering(de), 2.0, 1.0, 37.0, 0.0, kParams, kSettings);
  const double g = kinematics(Sym3{}, init, kParams).c_bar.shear();
  EXPECT_NEAR(stress[3], 2 * g * de[3], 1e-9);
}
