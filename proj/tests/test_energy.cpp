#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "sma/energy.hpp"
#include "sma/errors.hpp"
#include "sma/verification.hpp"

using namespace sma;

namespace {

const MaterialParams kParams;

}  // namespace

TEST(PhaseFractions, ZeroLogitsGiveUniformFractions) {
  const PhaseFractions f = PhaseFractions::from_logits({0, 0, 0, 0});
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(f[i], 0.25);
  EXPECT_EQ(fraction_sum(f.lambda()), 1.0);
  EXPECT_DOUBLE_EQ(sigmoid(0.0), 0.5);
  // Chain factor dλ/dχ = λ(1 - λ) at the midpoint.
  const double h = 1e-6;
  EXPECT_NEAR((sigmoid(h) - sigmoid(-h)) / (2 * h), 0.25, 1e-10);
}

TEST(PhaseFractions, SumClosesExactly) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int n = 0; n < 1000; ++n) {
    const PhaseFractions f = PhaseFractions::from_fractions({u(rng), u(rng), u(rng), u(rng)});
    EXPECT_EQ(fraction_sum(f.lambda()), 1.0);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(sigmoid(f.chi()[static_cast<std::size_t>(i)]), f[i], 1e-15);
  }
}

TEST(PhaseFractions, RejectsBoundaryFractions) {
  EXPECT_THROW(PhaseFractions::from_fractions({1, 0, 0, 0}), DomainError);
  int clamped = 0;
  const PhaseFractions f = PhaseFractions::from_fractions_clamped({1, 0, 0, 0}, 1e-9, &clamped);
  EXPECT_EQ(clamped, 4);
  EXPECT_EQ(fraction_sum(f.lambda()), 1.0);
}

TEST(MaterialParamsTest, CaloricLaw) {
  const Vec4 c = kParams.caloric(20.0);
  EXPECT_NEAR(c[0], -13.4465, 1e-12);
  EXPECT_EQ(c[1], 0.0);
}

TEST(Penalty, SinglePhaseTermAtHalf) {
  // Four phases at 0.5 is not a valid mixture, but the sum is term-wise.
  EXPECT_NEAR(penalty_energy({0.5, 0.5, 0.5, 0.5}, kParams), 4 * 8e-5, 1e-18);
  EXPECT_THROW(penalty_energy({1, 0, 0, 0}, kParams), DomainError);
}

TEST(Penalty, DerivativeMatchesFiniteDifference) {
  for (double l : {0.01, 0.2, 0.5, 0.77, 0.99}) {
    const double h = 1e-7 * l;
    const auto term = [&](double x) { return kParams.penalty / (x * x * (1 - x) * (1 - x)); };
    const double fd = (term(l + h) - term(l - h)) / (2 * h);
    EXPECT_NEAR(penalty_derivative(l, kParams), fd, 1e-6 * std::abs(fd) + 1e-12);
  }
}

TEST(Hardening, StressAtZeroAndAsymptote) {
  EXPECT_EQ(hardening_stress(0.0, kParams), 0.0);
  const double k = 1.0;
  EXPECT_NEAR(hardening_stress(k, kParams),
              kParams.hardening_k1 * k - (kParams.hardening_k1 - kParams.hardening_k0) / kParams.hardening_k2, 1e-9);
  const double h = 1e-7, x = 0.003;
  EXPECT_NEAR((hardening_energy(x + h, kParams) - hardening_energy(x - h, kParams)) / (2 * h),
              hardening_stress(x, kParams), 1e-5);
}

TEST(FreeEnergy, StressFreeAusteniteClosedForm) {
  const MaterialState st = MaterialState::austenitic(0.01);
  const double theta = 20.0;
  const Vec4& l = st.fractions.lambda();
  // With Q = I the three variant strains sum to η̂(1 - 2ν̂) I, so η̄ is spherical.
  const double eta = 0.01 * kParams.eta_hat * (1 - 2 * kParams.nu_hat);
  const double ka = kParams.young_austenite / (3 * (1 - 2 * kParams.poisson_austenite));
  const double km = kParams.young_martensite / (3 * (1 - 2 * kParams.poisson_martensite));
  const double k_bar = 1.0 / (l[0] / ka + (l[1] + l[2] + l[3]) / km);
  const double elastic = 0.5 * 9.0 * k_bar * eta * eta;
  const double caloric = l[0] * (-13.4465);
  double pen = 0.0;
  for (double x : l) pen += kParams.penalty / (x * x * (1 - x) * (1 - x));
  const double hard = (kParams.hardening_k0 - kParams.hardening_k1) / (kParams.hardening_k2 * kParams.hardening_k2);
  EXPECT_NEAR(free_energy(Sym3{}, theta, st, kParams), elastic + caloric + hard + pen, 1e-12);
}

TEST(FreeEnergy, ConvexQuadraticInStrain) {
  const MaterialState st = MaterialState::with_fractions({0.4, 0.3, 0.2, 0.1});
  const Sym3 e0{0.01, -0.003, 0.002, 0.004, -0.001, 0.0005};
  const Sym3 de{1e-3, 2e-3, -1e-3, 5e-4, 2e-4, -3e-4};
  const double f0 = free_energy(e0, 30, st, kParams);
  const double fp = free_energy(e0 + de, 30, st, kParams);
  const double fm = free_energy(e0 - de, 30, st, kParams);
  const Kinematics k = kinematics(e0, st, kParams);
  EXPECT_NEAR(fp + fm - 2 * f0, ddot(de, k.c_bar.apply(de)), 1e-9);
  EXPECT_GT(fp + fm - 2 * f0, 0.0);
}

TEST(Gradient, ZeroElasticStrainGivesZeroStress) {
  MaterialState st = MaterialState::austenitic();
  const Kinematics k0 = kinematics(Sym3{}, st, kParams);
  const EnergyGradient g = d_free_energy(k0.eta_rotated, 37, st, kParams);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_NEAR(g.stress[i], 0.0, 1e-12);
    EXPECT_NEAR(g.d_eps_pl[i], 0.0, 1e-12);
  }
}

TEST(Gradient, StressIsMinusPlasticDerivative) {
  MaterialState st = MaterialState::with_fractions({0.4, 0.3, 0.2, 0.1});
  st.eps_pl = Sym3{1e-3, -5e-4, -5e-4, 2e-4, 0, 0};
  const EnergyGradient g = d_free_energy(Sym3{0.02, 0, -0.01, 0.003, 0, 0}, 37, st, kParams);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_DOUBLE_EQ(g.stress[i], -g.d_eps_pl[i]);
}

TEST(Gradient, FiniteDifferenceOracleSmall) {
  const OracleReport r = fd_gradient_check(20, 99);
  ASSERT_EQ(r.families.size(), 5u);
  for (const auto& f : r.families) EXPECT_TRUE(f.pass) << f.name << " max rel " << f.max_rel_error;
}

TEST(DrivingForcesTest, UniformGradientProjectsToZero) {
  EnergyGradient g;
  g.d_lambda = {3.5, 3.5, 3.5, 3.5};
  const MaterialState st = MaterialState::with_fractions({0.25, 0.25, 0.25, 0.25});
  const DrivingForces f = project_forces(g, st, kParams);
  for (double x : f.p_lambda) EXPECT_EQ(x, 0.0);
  MaterialParams verbatim = kParams;
  verbatim.lambda_projection = LambdaProjection::Verbatim;
  // Weighted mean with uniform λ is g/4, so the verbatim form keeps -3g/4.
  const DrivingForces v = project_forces(g, st, verbatim);
  for (double x : v.p_lambda) EXPECT_NEAR(x, -3.5 * 0.75, 1e-15);
}

TEST(DrivingForcesTest, ProjectionsAreOrthogonal) {
  std::mt19937_64 rng(31);
  for (int n = 0; n < 100; ++n) {
    const SampledPoint sp = sample_point(rng, 0.02);
    const DrivingForces f = driving_forces(sp.strain, sp.theta, sp.state, kParams);
    EXPECT_LE(std::abs(f.p_lambda[0] + f.p_lambda[1] + f.p_lambda[2] + f.p_lambda[3]), 1e-9 * norm(f.p_lambda) + 1e-15);
    EXPECT_LE(std::abs(dot(f.p_alpha, sp.state.alpha.v)), 1e-9 * norm(f.p_alpha) + 1e-15);
  }
}

TEST(DrivingForcesTest, HydrostaticStressHasNoPlasticDrive) {
  MaterialState st = MaterialState::austenitic();
  const Kinematics k0 = kinematics(Sym3{}, st, kParams);
  const DrivingForces f = driving_forces(k0.eta_rotated + 0.01 * Sym3::identity(), 37, st, kParams);
  EXPECT_LT(norm(f.dev_stress), 1e-9);
  const YieldValues y = yield_functions(f, kParams);
  EXPECT_NEAR(y.plastic, -(kParams.r_plastic + f.mu), 1e-9);
  EXPECT_LT(y.plastic, 0.0);
}

TEST(YieldFunctions, ZeroForces) {
  const YieldValues y = yield_functions(DrivingForces{}, kParams);
  EXPECT_EQ(y.lambda, -kParams.r_lambda);
  EXPECT_EQ(y.alpha, -kParams.r_alpha);
  EXPECT_EQ(y.plastic, -kParams.r_plastic);
}

TEST(YieldFunctions, OnTheBoundary) {
  DrivingForces f;
  f.p_lambda = {kParams.r_lambda * 0.6, -kParams.r_lambda * 0.8, 0, 0};
  EXPECT_NEAR(yield_functions(f, kParams).lambda, 0.0, 1e-15);
  // ‖dev σ‖ = r_pl exactly with μ = 0.
  const double s = kParams.r_plastic / std::sqrt(2.0 / 3.0);
  f.dev_stress = dev(Sym3::diagonal(s, 0, 0));
  EXPECT_NEAR(yield_functions(f, kParams).plastic, 0.0, 1e-12);
  EXPECT_NEAR(std::sqrt(1.5) * 750.0, 918.56, 0.01);
}

TEST(YieldFunctions, StressFreeAusteniteIsElastic) {
  // The δ = 0.01 preset lies just outside the λ domain; δ = 0.008 is inside.
  const MaterialState st = MaterialState::austenitic(0.008);
  const Kinematics k0 = kinematics(Sym3{}, st, kParams);
  const YieldValues y = yield_functions(driving_forces(k0.eta_rotated, 37, st, kParams), kParams);
  EXPECT_LT(y.lambda, 0.0);
  EXPECT_LT(y.alpha, 0.0);
  EXPECT_LT(y.plastic, 0.0);
}

TEST(MaterialParamsTest, Validation) {
  MaterialParams p;
  EXPECT_NO_THROW(p.validate());
  p.r_lambda = 0.0;
  EXPECT_THROW(p.validate(), ValidationError);
}
