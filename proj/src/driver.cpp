#include "sma/driver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <numeric>

namespace sma {

double Trace::peak_stress() const {
  double peak = 0.0;
  for (const auto& r : rows) {
    for (double c : r.stress.components()) peak = std::max(peak, std::abs(c));
  }
  return peak;
}

namespace {

/// dσ/dε for tensor-shear storage: the engineering-shear columns doubled.
Eigen::Matrix<double, 6, 6> tensor_tangent(const IsoStiffness& c) {
  const auto v = c.voigt_matrix();
  Eigen::Matrix<double, 6, 6> m;
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) m(i, j) = v[static_cast<std::size_t>(6 * i + j)] * (j >= 3 ? 2.0 : 1.0);
  }
  return m;
}

TraceRow make_row(int index, int step, double theta, const Sym3& reference, const Sym3& strain,
                  const MaterialState& state,
                  const Sym3& stress_incremental_material, const Mat3& frame, const MaterialParams& p) {
  TraceRow row;
  row.index = index;
  row.step = step;
  row.theta = theta;
  row.strain = strain;
  row.stress = rotate_transposed(frame, state.stress);
  row.eps_pl = rotate_transposed(frame, state.eps_pl);
  row.stress_incremental = rotate_transposed(frame, stress_incremental_material);
  row.state = state;
  row.forces = driving_forces(reference + rotate(frame, strain), theta, state, p);
  row.phi = yield_functions(row.forces, p);
  return row;
}

}  // namespace

Trace run_path(const RunConfig& cfg) {
  const MaterialParams& p = cfg.params;
  const SolverSettings& s = cfg.solver;
  const Mat3& frame = cfg.frame;

  Trace trace;
  double theta = cfg.initial_temperature;
  // Strains are measured from the stress-free configuration of the initial phase state.
  Equilibrium eq;
  try {
    eq = stress_free_equilibrium(cfg.initial_state(), theta, p, s);
  } catch (const ConvergenceError& e) {
    throw PathError(PathError::Kind::NonConvergence, e.what(), 0, e.report(), trace);
  }
  const Sym3 reference = eq.strain;
  MaterialState state = eq.state;
  Sym3 strain;
  Sym3 stress_incremental = state.stress;
  trace.rows.push_back(make_row(0, -1, theta, reference, strain, state, stress_incremental, frame, p));
  double peak = trace.peak_stress();

  int index = 0;
  for (std::size_t k = 0; k < cfg.steps.size(); ++k) {
    const LoadStep& st = cfg.steps[k];
    const Sym3 stress_now = trace.rows.back().stress;
    std::array<double, 6> start{};
    std::vector<std::size_t> free;
    for (std::size_t c = 0; c < 6; ++c) {
      const bool strain_ctl = st.targets[c].mode == Control::Strain;
      if (!strain_ctl) free.push_back(c);
      // A component that keeps its mode ramps from its previous target; one that switches
      // mode ramps from its current value. Stress targets of the first step hold from the
      // first increment on.
      if (k > 0 && cfg.steps[k - 1].targets[c].mode == st.targets[c].mode) {
        start[c] = cfg.steps[k - 1].targets[c].value;
      } else if (k == 0 && !strain_ctl) {
        start[c] = st.targets[c].value;
      } else {
        start[c] = strain_ctl ? strain[c] : stress_now[c];
      }
    }
    const auto nf = static_cast<Eigen::Index>(free.size());
    const double theta_start = theta;

    for (int n = 1; n <= st.increments; ++n) {
      ++index;
      const double f = static_cast<double>(n) / st.increments;
      std::array<double, 6> target{};
      for (std::size_t c = 0; c < 6; ++c) {
        target[c] = n == st.increments ? st.targets[c].value : start[c] + (st.targets[c].value - start[c]) * f;
      }
      const double theta_n = n == st.increments ? st.temperature : theta_start + (st.temperature - theta_start) * f;

      Sym3 trial = strain;
      for (std::size_t c = 0; c < 6; ++c) {
        if (st.targets[c].mode == Control::Strain) trial[c] = target[c];
      }

      Eigen::MatrixXd jac(nf, nf);
      const Sym3 current_stress = trace.rows.back().stress;
      if (nf > 0) {
        // Elastic predictor for the free components.
        const auto c6 = tensor_tangent(reuss_effective(state.fractions.lambda(), p.phase_stiffness()));
        Eigen::VectorXd rhs(nf);
        for (Eigen::Index a = 0; a < nf; ++a) {
          const auto ca = free[static_cast<std::size_t>(a)];
          rhs(a) = target[ca] - current_stress[ca];
          for (std::size_t c = 0; c < 6; ++c) {
            if (st.targets[c].mode == Control::Strain) rhs(a) -= c6(static_cast<Eigen::Index>(ca), static_cast<Eigen::Index>(c)) * (trial[c] - strain[c]);
          }
          for (Eigen::Index b = 0; b < nf; ++b) {
            jac(a, b) = c6(static_cast<Eigen::Index>(ca), static_cast<Eigen::Index>(free[static_cast<std::size_t>(b)]));
          }
        }
        const Eigen::VectorXd d = jac.partialPivLu().solve(rhs);
        for (Eigen::Index a = 0; a < nf; ++a) trial[free[static_cast<std::size_t>(a)]] += d(a);
      }

      double target_scale = peak;
      for (std::size_t c : free) target_scale = std::max(target_scale, std::abs(target[c]));
      const double tol = 1e-6 * std::max(1.0, target_scale);

      PointUpdate up;
      Eigen::VectorXd r_prev(nf), step(nf);
      int it = 0;
      for (;; ++it) {
        PointInput in;
        in.strain = reference + rotate(frame, trial);
        in.strain_increment = rotate(frame, trial - strain);
        in.theta = theta_n;
        in.time_increment = 1.0 / st.increments;
        in.first_increment = index == 1;
        try {
          up = update_point(in, state, p, s);
        } catch (const ConvergenceError& e) {
          throw PathError(PathError::Kind::NonConvergence, e.what(), index, e.report(), trace);
        }
        if (nf == 0) break;

        const Sym3 stress_load = rotate_transposed(frame, up.stress);
        Eigen::VectorXd r(nf);
        for (Eigen::Index a = 0; a < nf; ++a) {
          const auto ca = free[static_cast<std::size_t>(a)];
          r(a) = stress_load[ca] - target[ca];
        }
        if (r.lpNorm<Eigen::Infinity>() <= tol) break;
        if (it == kMixedControlMaxIterations) {
          throw PathError(PathError::Kind::MixedControl,
                          "mixed-control iteration did not meet the stress targets", index, up.report, trace);
        }
        if (it > 0) {
          // Broyden rank-one update of the free-block Jacobian.
          const Eigen::VectorXd y = r - r_prev;
          jac += (y - jac * step) * step.transpose() / step.squaredNorm();
        }
        step = -jac.partialPivLu().solve(r);
        for (Eigen::Index a = 0; a < nf; ++a) trial[free[static_cast<std::size_t>(a)]] += step(a);
        r_prev = r;
      }

      stress_incremental += up.incremental_stress_increment;
      state = up.state;
      strain = trial;
      theta = theta_n;
      TraceRow row = make_row(index, static_cast<int>(k), theta, reference, strain, state, stress_incremental, frame, p);
      row.report = up.report;
      row.control_iterations = it;
      for (double c : row.stress.components()) peak = std::max(peak, std::abs(c));
      trace.rows.push_back(std::move(row));
    }
  }
  return trace;
}

void write_csv(std::ostream& out, const Trace& trace) {
  out << "t_index,theta_C";
  for (const char* c : kComponentNames) out << ",eps_" << c;
  for (const char* c : kComponentNames) out << ",sig_" << c;
  out << ",lam_0,lam_1,lam_2,lam_3,alpha_a,alpha_b,alpha_c,alpha_d";
  for (const char* c : kComponentNames) out << ",epspl_" << c;
  out << ",kappa,phi_lambda,phi_alpha,phi_pl\n";

  char buf[32];
  const auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << ',' << buf;
  };
  for (const auto& r : trace.rows) {
    out << r.index;
    num(r.theta);
    for (double v : r.strain.components()) num(v);
    for (double v : r.stress.components()) num(v);
    for (double v : r.state.fractions.lambda()) num(v);
    for (double v : r.state.alpha.v) num(v);
    for (double v : r.eps_pl.components()) num(v);
    num(r.state.kappa);
    num(r.phi.lambda);
    num(r.phi.alpha);
    num(r.phi.plastic);
    out << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const Trace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  write_csv(out, trace);
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

RunConfig with_total_increments(const RunConfig& cfg, int total) {
  long current = 0;
  for (const auto& st : cfg.steps) current += st.increments;
  RunConfig out = cfg;
  for (auto& st : out.steps) {
    const long scaled = static_cast<long>(st.increments) * total;
    if (total < 1 || scaled % current != 0) {
      throw ConfigError("increment total " + std::to_string(total) + " does not divide step '" + st.label +
                            "' evenly",
                        "increments", 0);
    }
    st.increments = static_cast<int>(scaled / current);
  }
  return out;
}

SweepResult sweep(const RunConfig& cfg, const std::vector<int>& totals) {
  if (totals.empty()) throw ConfigError("sweep needs at least one increment count", "increments", 0);
  std::vector<RunConfig> variants;
  for (int t : totals) variants.push_back(with_total_increments(cfg, t));

  std::vector<std::future<Trace>> jobs;
  for (const auto& v : variants) jobs.push_back(std::async(std::launch::async, [&v] { return run_path(v); }));

  SweepResult out;
  for (std::size_t i = 0; i < totals.size(); ++i) out.levels.push_back({totals[i], jobs[i].get(), 0.0});

  const auto ref = static_cast<std::size_t>(std::max_element(totals.begin(), totals.end()) - totals.begin());
  out.reference = totals[ref];
  out.peak_stress = out.levels[ref].trace.peak_stress();

  // Grid points shared by all levels: per step, every (N_step / gcd)-th row.
  const std::size_t nsteps = cfg.steps.size();
  std::vector<int> grid(nsteps, 0);
  for (std::size_t k = 0; k < nsteps; ++k) {
    for (const auto& v : variants) grid[k] = std::gcd(grid[k], v.steps[k].increments);
  }
  const auto rows_on_grid = [&](const RunConfig& v) {
    std::vector<std::size_t> idx{0};
    std::size_t offset = 0;
    for (std::size_t k = 0; k < nsteps; ++k) {
      const auto n = static_cast<std::size_t>(v.steps[k].increments);
      const auto stride = n / static_cast<std::size_t>(grid[k]);
      for (std::size_t j = 1; j <= static_cast<std::size_t>(grid[k]); ++j) idx.push_back(offset + j * stride);
      offset += n;
    }
    return idx;
  };
  const auto ref_rows = rows_on_grid(variants[ref]);
  for (std::size_t i = 0; i < totals.size(); ++i) {
    const auto rows = rows_on_grid(variants[i]);
    double dev = 0.0;
    for (std::size_t g = 0; g < rows.size(); ++g) {
      const Sym3 d = out.levels[i].trace.rows[rows[g]].stress - out.levels[ref].trace.rows[ref_rows[g]].stress;
      for (double c : d.components()) dev = std::max(dev, std::abs(c));
    }
    out.levels[i].max_deviation = dev;
  }
  return out;
}

}  // namespace sma
