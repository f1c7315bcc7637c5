#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "sma/config.hpp"
#include "sma/driver.hpp"

using namespace sma;

namespace {

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::string csv_of(const Trace& t) {
  std::ostringstream out;
  write_csv(out, t);
  return out.str();
}

const char* kUniaxial = R"(
temperature = 37
[step]
increments = 40
eps_11 = 0.03
sig_22 = 0
sig_33 = 0
[step]
increments = 40
eps_11 = 0
)";

}  // namespace

TEST(RunPath, SingleElasticIncrement) {
  // δ = 0.008 starts strictly inside the λ elastic domain.
  const RunConfig cfg = parse("temperature = 37\ninitial_delta = 0.008\n[step]\nincrements = 1\neps_11 = 0.001\n");
  const Trace t = run_path(cfg);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0].index, 0);
  EXPECT_EQ(t.rows[1].index, 1);
  EXPECT_EQ(t.rows[1].state.fractions, t.rows[0].state.fractions);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(t.rows[0].stress[i], 0.0, 1e-9);
  const MaterialState st = cfg.initial_state();
  const IsoStiffness c = kinematics(Sym3{}, st, cfg.params).c_bar;
  const Sym3 expected = c.apply(t.rows[1].strain - t.rows[0].strain);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(t.rows[1].stress[i] - t.rows[0].stress[i], expected[i], 1e-9);
  EXPECT_EQ(t.rows[1].strain[0], 0.001);
}

TEST(RunPath, UniaxialStressControlHoldsLateralTargets) {
  const Trace t = run_path(parse(kUniaxial));
  ASSERT_EQ(t.rows.size(), 81u);
  const double tol = 1e-6 * std::max(1.0, t.peak_stress());
  for (std::size_t k = 1; k < t.rows.size(); ++k) {
    EXPECT_LE(std::abs(t.rows[k].stress[1]), tol) << "row " << k;
    EXPECT_LE(std::abs(t.rows[k].stress[2]), tol) << "row " << k;
  }
  EXPECT_NEAR(t.rows[40].strain[0], 0.03, 1e-15);
  EXPECT_EQ(t.rows.back().strain[0], 0.0);
  // Lateral contraction follows from the free components.
  EXPECT_LT(t.rows[40].strain[1], 0.0);
}

TEST(RunPath, AusteniteFractionFallsDuringLoadingPlateau) {
  const Trace t = run_path(parse(kUniaxial));
  // Before the plateau the variants rearrange and austenite may grow slightly.
  for (std::size_t k = 1; k <= 40; ++k) {
    if (t.rows[k - 1].strain[0] >= 0.01) {
      EXPECT_LE(t.rows[k].state.fractions[0], t.rows[k - 1].state.fractions[0]) << "row " << k;
    }
  }
  EXPECT_LT(t.rows[40].state.fractions[0], 0.7);
}

TEST(RunPath, DeterministicCsv) {
  const RunConfig cfg = parse(kUniaxial);
  EXPECT_EQ(csv_of(run_path(cfg)), csv_of(run_path(cfg)));
}

TEST(RunPath, CsvHeaderAndPrecision) {
  const std::string csv = csv_of(run_path(parse("[step]\nincrements = 1\neps_11 = 0.001\n")));
  const std::string header = csv.substr(0, csv.find('\n'));
  EXPECT_EQ(header,
            "t_index,theta_C,eps_11,eps_22,eps_33,eps_12,eps_13,eps_23,sig_11,sig_22,sig_33,sig_12,sig_13,sig_23,"
            "lam_0,lam_1,lam_2,lam_3,alpha_a,alpha_b,alpha_c,alpha_d,epspl_11,epspl_22,epspl_33,epspl_12,epspl_13,"
            "epspl_23,kappa,phi_lambda,phi_alpha,phi_pl");
  // Every field round-trips to the stored double.
  const Trace t = run_path(parse("[step]\nincrements = 1\neps_11 = 0.001\n"));
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  std::getline(lines, line);
  std::getline(lines, line);
  std::vector<double> fields;
  std::istringstream cells(line);
  for (std::string cell; std::getline(cells, cell, ',');) fields.push_back(std::stod(cell));
  ASSERT_EQ(fields.size(), 32u);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(fields[2 + i], t.rows[1].strain[i]);
    EXPECT_EQ(fields[8 + i], t.rows[1].stress[i]);
  }
  EXPECT_EQ(fields[14], t.rows[1].state.fractions[0]);
}

TEST(RunPath, NonConvergenceCarriesLastGoodRows) {
  RunConfig cfg = parse(std::string("initial_delta = 0.008\n") + kUniaxial);
  cfg.solver.max_iterations = 1;
  try {
    run_path(cfg);
    FAIL() << "expected PathError";
  } catch (const PathError& e) {
    EXPECT_EQ(e.kind(), PathError::Kind::NonConvergence);
    EXPECT_GT(e.increment(), 1);
    EXPECT_EQ(static_cast<int>(e.last_good().rows.size()), e.increment());
  }
}

TEST(RunPath, FrameRotationIsInvisibleForTwinnedMartensite) {
  const std::string base = R"(
temperature = -10
initial_phase = twinned-martensite
[step]
increments = 30
eps_11 = 0.02
sig_22 = 0
sig_33 = 0
sig_12 = 0
sig_13 = 0
sig_23 = 0
)";
  const Trace a = run_path(parse(base));
  const Trace b = run_path(parse("frame_axis = 1 1 1\nframe_angle = 33\n" + base));
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t k = 0; k < a.rows.size(); ++k)
    EXPECT_NEAR(b.rows[k].stress[0], a.rows[k].stress[0], 1e-6 * std::max(1.0, std::abs(a.rows[k].stress[0])));
}

TEST(WithTotalIncrements, ScalesStepCounts) {
  const RunConfig cfg = parse(kUniaxial);
  const RunConfig scaled = with_total_increments(cfg, 200);
  EXPECT_EQ(scaled.steps[0].increments, 100);
  EXPECT_EQ(scaled.steps[1].increments, 100);
  EXPECT_THROW(with_total_increments(cfg, 81), ConfigError);
}

TEST(Sweep, DeviationShrinksWithIncrementCount) {
  const SweepResult r = sweep(parse(kUniaxial), {40, 80, 160});
  ASSERT_EQ(r.levels.size(), 3u);
  EXPECT_EQ(r.reference, 160);
  EXPECT_EQ(r.levels[2].max_deviation, 0.0);
  EXPECT_GT(r.levels[0].max_deviation, r.levels[1].max_deviation);
  EXPECT_GT(r.peak_stress, 0.0);
}
