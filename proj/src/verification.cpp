#include "sma/verification.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <sstream>

namespace sma {

bool OracleReport::pass() const {
  for (const auto& f : families) {
    if (!f.pass) return false;
  }
  for (const auto& p : properties) {
    if (!p.pass()) return false;
  }
  return true;
}

nlohmann::json OracleReport::to_json() const {
  nlohmann::json j;
  j["kind"] = kind;
  j["seed"] = seed;
  j["samples"] = samples;
  j["pass"] = pass();
  j["families"] = nlohmann::json::array();
  for (const auto& f : families) {
    j["families"].push_back({{"name", f.name},
                             {"max_rel_error", f.max_rel_error},
                             {"max_abs_error", f.max_abs_error},
                             {"worst_sample", f.worst_sample},
                             {"failures", f.failures},
                             {"pass", f.pass}});
  }
  j["properties"] = nlohmann::json::array();
  for (const auto& p : properties) {
    j["properties"].push_back({{"name", p.name},
                               {"checked", p.checked},
                               {"failures", p.failures},
                               {"first_failure", p.first_failure},
                               {"detail", p.detail},
                               {"pass", p.pass()}});
  }
  return j;
}

namespace {

// std distributions are implementation-defined; these keep samples identical across
// standard libraries.
double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

double gaussian(std::mt19937_64& rng) {
  const double u1 = 1.0 - uniform(rng, 0.0, 1.0);
  const double u2 = uniform(rng, 0.0, 1.0);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

Sym3 random_sym(std::mt19937_64& rng, double max_norm) {
  Sym3 e;
  for (std::size_t k = 0; k < 6; ++k) e[k] = uniform(rng, -1.0, 1.0);
  const double n = norm(e);
  return n > 0.0 ? (max_norm * uniform(rng, 0.0, 1.0) / n) * e : e;
}

Sym3 unit_component(std::size_t k) {
  Sym3 e;
  e[k] = 1.0;
  return e;
}

/// Central difference refined by one Richardson step.
double fd_derivative(const std::function<double(double)>& f, double h) {
  const auto central = [&](double hh) { return (f(hh) - f(-hh)) / (2.0 * hh); };
  return (4.0 * central(0.5 * h) - central(h)) / 3.0;
}

void record(FamilyResult& fam, const std::vector<double>& analytic, const std::vector<double>& fd, int sample,
            const GradientCheckSettings& g) {
  double err2 = 0.0, ref2 = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    err2 += (fd[i] - analytic[i]) * (fd[i] - analytic[i]);
    ref2 += analytic[i] * analytic[i];
  }
  const double err = std::sqrt(err2);
  // Relative to ‖analytic‖, with the absolute floor folded into the denominator.
  const double rel = err / std::max(std::sqrt(ref2), g.abs_floor / g.rel_tol);
  if (rel > fam.max_rel_error || fam.worst_sample < 0) {
    fam.max_rel_error = rel;
    fam.worst_sample = sample;
  }
  fam.max_abs_error = std::max(fam.max_abs_error, err);
  if (!(rel <= g.rel_tol)) {
    ++fam.failures;
    fam.pass = false;
  }
}

/// Orthonormal basis of the tangent space of the unit 3-sphere at `alpha`.
std::array<Vec4, 3> tangent_basis(const Vec4& alpha) {
  std::array<Vec4, 3> basis{};
  std::size_t found = 0;
  for (std::size_t k = 0; k < 4 && found < 3; ++k) {
    Vec4 v{};
    v[k] = 1.0;
    const double along = dot(v, alpha);
    for (std::size_t i = 0; i < 4; ++i) v[i] -= along * alpha[i];
    for (std::size_t b = 0; b < found; ++b) {
      const double c = dot(v, basis[b]);
      for (std::size_t i = 0; i < 4; ++i) v[i] -= c * basis[b][i];
    }
    const double n = norm(v);
    if (n < 0.5) continue;
    for (double& x : v) x /= n;
    basis[found++] = v;
  }
  return basis;
}

void note_failure(PropertyResult& prop, int sample, const std::string& detail) {
  if (prop.failures == 0) {
    prop.first_failure = sample;
    prop.detail = detail;
  }
  ++prop.failures;
}

}  // namespace

std::mt19937_64 sample_rng(std::uint64_t seed, int index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index)};
  return std::mt19937_64(seq);
}

SampledPoint sample_point(std::mt19937_64& rng, double max_strain) {
  SampledPoint sp;
  Vec4 lam{};
  for (double& l : lam) l = uniform(rng, 0.05, 0.9);
  sp.state.fractions = PhaseFractions::from_fractions(lam);

  Vec4 a{};
  double n = 0.0;
  while (n < 1e-3) {
    for (double& x : a) x = gaussian(rng);
    n = norm(a);
  }
  for (double& x : a) x /= n;
  sp.state.alpha = Quat(a);

  sp.strain = random_sym(rng, max_strain);
  sp.state.kappa = uniform(rng, 0.0, 0.02);
  sp.theta = uniform(rng, -20.0, 60.0);
  sp.state.eps_pl = dev(random_sym(rng, 0.005));
  sp.state.initialized = true;
  return sp;
}

OracleReport fd_gradient_check(int samples, std::uint64_t seed, const MaterialParams& p,
                               const GradientCheckSettings& g) {
  OracleReport rep;
  rep.kind = "fd_gradient_check";
  rep.seed = seed;
  rep.samples = samples;
  FamilyResult f_lambda{"lambda"}, f_alpha{"alpha"}, f_eps_pl{"eps_pl"}, f_kappa{"kappa"}, f_strain{"strain"};

  for (int i = 0; i < samples; ++i) {
    auto rng = sample_rng(seed, i);
    const SampledPoint sp = sample_point(rng);
    const Vec4& lam = sp.state.fractions.lambda();
    const Quat& alpha = sp.state.alpha;
    const Sym3& eps_pl = sp.state.eps_pl;
    const double kappa = sp.state.kappa;
    const auto psi = [&](const Sym3& e, const Vec4& l, const Quat& a, const Sym3& ep, double k) {
      return free_energy(e, sp.theta, l, a, ep, k, p);
    };

    const EnergyGradient an = d_free_energy(sp.strain, sp.theta, sp.state, p);

    {
      std::vector<double> a(4), fd(4);
      for (std::size_t k = 0; k < 4; ++k) {
        a[k] = an.d_lambda[k];
        fd[k] = fd_derivative(
            [&](double t) {
              Vec4 l = lam;
              l[k] += t;
              return psi(sp.strain, l, alpha, eps_pl, kappa);
            },
            g.step);
      }
      record(f_lambda, a, fd, i, g);
    }
    {
      // Geodesic perturbations α cos t + u sin t along a tangent basis.
      const auto basis = tangent_basis(alpha.v);
      std::vector<double> a(3), fd(3);
      for (std::size_t k = 0; k < 3; ++k) {
        a[k] = dot(an.d_alpha, basis[k]);
        fd[k] = fd_derivative(
            [&](double t) {
              Vec4 v{};
              for (std::size_t j = 0; j < 4; ++j) v[j] = std::cos(t) * alpha.v[j] + std::sin(t) * basis[k][j];
              return psi(sp.strain, lam, Quat(v), eps_pl, kappa);
            },
            g.step);
      }
      record(f_alpha, a, fd, i, g);
    }
    const auto sym_family = [&](FamilyResult& fam, const Sym3& analytic, bool plastic) {
      std::vector<double> a(6), fd(6);
      for (std::size_t k = 0; k < 6; ++k) {
        // Perturbing a stored shear component moves both (i, j) and (j, i).
        a[k] = analytic[k] * (k >= 3 ? 2.0 : 1.0);
        fd[k] = fd_derivative(
            [&](double t) {
              const Sym3 d = t * unit_component(k);
              return plastic ? psi(sp.strain, lam, alpha, eps_pl + d, kappa)
                             : psi(sp.strain + d, lam, alpha, eps_pl, kappa);
            },
            g.step);
      }
      record(fam, a, fd, i, g);
    };
    sym_family(f_eps_pl, an.d_eps_pl, true);
    sym_family(f_strain, an.stress, false);
    {
      const double fd = fd_derivative([&](double t) { return psi(sp.strain, lam, alpha, eps_pl, kappa + t); }, g.step);
      record(f_kappa, {an.d_kappa}, {fd}, i, g);
    }
  }
  rep.families = {f_lambda, f_alpha, f_eps_pl, f_kappa, f_strain};
  return rep;
}

SolverSettings oracle_solver_settings() {
  SolverSettings s;
  s.max_outer_passes = 2000;
  return s;
}

OracleReport elastic_domain_check(int samples, std::uint64_t seed, const MaterialParams& p, const SolverSettings& s) {
  OracleReport rep;
  rep.kind = "elastic_domain_check";
  rep.seed = seed;
  rep.samples = samples;
  PropertyResult inside{"no_step_inside_elastic_domain", 0, 0, -1, {}};
  PropertyResult accepted{"post_solve_acceptance", 0, 0, -1, {}};
  PropertyResult constraints{"post_solve_constraints", 0, 0, -1, {}};
  PropertyResult converged{"solver_converged", 0, 0, -1, {}};
  const double t_l = s.t_lambda(p), t_a = s.t_alpha(p), t_p = s.t_plastic(p);

  for (int i = 0; i < samples; ++i) {
    auto rng = sample_rng(seed, i);
    const SampledPoint sp = sample_point(rng, kElasticCheckMaxStrain);

    const auto expect_no_step = [&](const MaterialState& st) {
      ++inside.checked;
      try {
        const RelaxResult again = relax(sp.strain, sp.theta, st, p, s);
        if (!(again.state == st) || again.report.outer_passes != 0) note_failure(inside, i, "state changed");
      } catch (const ConvergenceError& e) {
        note_failure(inside, i, e.what());
      }
    };

    const YieldValues y0 = yield_functions(driving_forces(sp.strain, sp.theta, sp.state, p), p);
    if (y0.lambda <= t_l && y0.alpha <= t_a && y0.plastic <= t_p) {
      expect_no_step(sp.state);
      continue;
    }

    ++converged.checked;
    RelaxResult r;
    try {
      r = relax(sp.strain, sp.theta, sp.state, p, s);
    } catch (const ConvergenceError& e) {
      note_failure(converged, i, e.what());
      continue;
    }

    ++accepted.checked;
    const YieldValues y = yield_functions(driving_forces(sp.strain, sp.theta, r.state, p), p);
    std::ostringstream why;
    const auto channel = [&](const char* name, double phi, double tol, bool evolved) {
      if (phi > tol || (evolved && std::abs(phi) > tol)) why << name << " phi=" << phi << " ";
    };
    channel("lambda", y.lambda, t_l, r.report.lambda.evolved);
    channel("alpha", y.alpha, t_a, r.report.alpha.evolved);
    channel("plastic", y.plastic, t_p, r.report.plastic.evolved);
    if (!why.str().empty()) note_failure(accepted, i, why.str());

    ++constraints.checked;
    if (std::abs(r.state.alpha.norm_sq() - 1.0) > s.t_alpha_beta) note_failure(constraints, i, "alpha norm");
    if (fraction_sum(r.state.fractions.lambda()) != 1.0) note_failure(constraints, i, "lambda sum");
    if (std::abs(trace(r.state.eps_pl)) > 1e-10) note_failure(constraints, i, "trace eps_pl");

    // The relaxed state sits inside the elastic domain, so a second pass must not move it.
    expect_no_step(r.state);
  }
  rep.properties = {inside, accepted, constraints, converged};
  return rep;
}

}  // namespace sma
