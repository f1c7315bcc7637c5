#include "sma/evolution.hpp"

#include <algorithm>
#include <cmath>

namespace sma {

void SolverSettings::validate() const {
  const bool ok = t_lambda_rel > 0.0 && t_alpha_rel > 0.0 && t_plastic_rel > 0.0 && t_alpha_beta > 0.0 &&
                  delta_alpha_max > 0.0 && max_iterations > 0 && max_outer_passes > 0 && bisection_tol > 0.0 &&
                  bisection_max_iterations > 0 && bracket_max_doublings > 0 && fd_step > 0.0 &&
                  lambda_min > 0.0 && lambda_min < 0.25 && max_backtracks >= 0;
  if (!ok) throw ValidationError("solver settings must all be positive");
}

void StepReport::merge(const StepReport& other) {
  const auto fold = [](ChannelReport& mine, const ChannelReport& theirs) {
    mine.iterations += theirs.iterations;
    if (theirs.evolved) {
      mine.evolved = true;
      mine.residual = theirs.residual;
    }
  };
  fold(lambda, other.lambda);
  fold(alpha, other.alpha);
  fold(plastic, other.plastic);
  scaled_step = scaled_step || other.scaled_step;
  bisection = bisection || other.bisection;
  damping = damping || other.damping;
  lambda_clamps += other.lambda_clamps;
  newton_fallbacks += other.newton_fallbacks;
  if (other.lambda.evolved) lambda_sum = other.lambda_sum;
  if (other.alpha.evolved) alpha_constraint = other.alpha_constraint;
}

double damp_oscillation(double phi_previous, double phi_current, double previous_scale) {
  const bool flipped = (phi_previous > 0.0 && phi_current < 0.0) || (phi_previous < 0.0 && phi_current > 0.0);
  if (flipped && std::abs(phi_current) > 0.9 * std::abs(phi_previous)) return 0.5 * previous_scale;
  if (std::abs(phi_current) < std::abs(phi_previous)) return 1.0;
  return previous_scale;
}

namespace {

/// dφ/dρ by central differences, or forward differences when `forward` is set.
template <class Phi>
double slope_of(const Phi& phi_at, double phi0, double h, bool forward) {
  if (forward) return (phi_at(h) - phi0) / h;
  return (phi_at(h) - phi_at(-h)) / (2.0 * h);
}

/// Newton step -φ/φ'. When φ' has the wrong sign the step falls back to a fixed move of
/// size `fallback_norm` along the direction.
double newton_rho(double phi, double slope, double direction_norm, double fallback_norm, StepReport& rep) {
  if (slope < 0.0 && std::isfinite(slope)) return -phi / slope;
  ++rep.newton_fallbacks;
  return (phi > 0.0 ? 1.0 : -1.0) * fallback_norm / direction_norm;
}

double phi_lambda(const Sym3& strain, double theta, const MaterialState& st, const MaterialParams& p) {
  return norm(driving_forces(strain, theta, st, p).p_lambda) - p.r_lambda;
}

double phi_plastic(const Sym3& strain, double theta, const MaterialState& st, const MaterialParams& p) {
  const DrivingForces f = driving_forces(strain, theta, st, p);
  return norm(f.dev_stress) - (p.r_plastic + f.mu);
}

Vec4 axpy(const Vec4& x, double a, const Vec4& y) {
  return {x[0] + a * y[0], x[1] + a * y[1], x[2] + a * y[2], x[3] + a * y[3]};
}

/// Finds β such that ‖α + ρ (p̄ + 2 (β - β₀) α)‖² = 1, β₀ being the analytic multiplier
/// already folded into p̄. Symmetric bracket around β₀ grown by doubling, then bisection.
Quat restore_unit_norm(const Vec4& alpha, const Vec4& direction, double rho, const SolverSettings& s,
                       StepReport& rep) {
  const auto candidate = [&](double dbeta) { return axpy(axpy(alpha, rho, direction), 2.0 * rho * dbeta, alpha); };
  const auto residual = [&](double dbeta) {
    const Vec4 a = candidate(dbeta);
    return dot(a, a) - 1.0;
  };

  const double r0 = residual(0.0);
  double width = std::abs(r0) / (4.0 * std::abs(rho)) + 1e-300;
  double lo = 0.0, hi = 0.0, r_lo = r0, r_hi = r0;
  bool bracketed = false;
  for (int k = 0; k <= s.bracket_max_doublings; ++k, width *= 2.0) {
    lo = -width;
    hi = width;
    r_lo = residual(lo);
    r_hi = residual(hi);
    if ((r_lo <= 0.0 && r_hi >= 0.0) || (r_lo >= 0.0 && r_hi <= 0.0)) {
      bracketed = true;
      break;
    }
  }
  if (!bracketed) throw BracketError("evolve_alpha: could not bracket the Lagrange multiplier beta", rep);
  rep.bisection = true;
  if (r_lo == 0.0) return Quat(candidate(lo));
  if (r_hi == 0.0) return Quat(candidate(hi));

  double mid = 0.5 * (lo + hi);
  for (int k = 0; k < s.bisection_max_iterations; ++k) {
    mid = 0.5 * (lo + hi);
    const double r_mid = residual(mid);
    if (std::abs(r_mid) <= s.bisection_tol || mid == lo || mid == hi) break;
    if ((r_mid < 0.0) == (r_lo < 0.0)) {
      lo = mid;
      r_lo = r_mid;
    } else {
      hi = mid;
    }
  }
  return Quat(candidate(mid));
}

}  // namespace

AlphaUpdate evolve_alpha(const Sym3& strain, double theta, const MaterialState& state, const MaterialParams& p,
                         const SolverSettings& s, bool active) {
  StepReport rep;
  const double tol = s.t_alpha(p);
  MaterialState work = state;

  DrivingForces f = driving_forces(strain, theta, work, p);
  double phi = norm(f.p_alpha) - p.r_alpha;
  rep.alpha.residual = phi;
  rep.alpha_constraint = std::abs(work.alpha.norm_sq() - 1.0);
  if (phi <= tol && !(active && phi < -tol)) return {work.alpha, rep};
  rep.alpha.evolved = true;

  double scale = 1.0;
  for (int it = 1;; ++it) {
    if (it > s.max_iterations) throw ConvergenceError("evolve_alpha: iteration limit exceeded", rep);

    const Vec4 dir = f.p_alpha;
    const Vec4 alpha = work.alpha.v;
    const double dir_norm = norm(dir);
    if (!(dir_norm > 0.0)) throw ConvergenceError("evolve_alpha: zero driving force", rep);

    // Δα = ρ p̄_α, limited component-wise, then projected back onto the unit sphere.
    const auto step = [&](double rho, StepReport* r) {
      Vec4 delta{rho * dir[0], rho * dir[1], rho * dir[2], rho * dir[3]};
      const double largest = std::max({std::abs(delta[0]), std::abs(delta[1]), std::abs(delta[2]), std::abs(delta[3])});
      double rho_eff = rho;
      if (largest > s.delta_alpha_max) {
        const double factor = s.delta_alpha_max / largest;
        for (double& x : delta) x *= factor;
        rho_eff *= factor;
        if (r) r->scaled_step = true;
      }
      Quat next(axpy(alpha, 1.0, delta));
      if (std::abs(next.norm_sq() - 1.0) > s.t_alpha_beta) {
        StepReport scratch;
        next = restore_unit_norm(alpha, dir, rho_eff, s, r ? *r : scratch);
      }
      return next;
    };
    const auto phi_at = [&](double rho) {
      MaterialState t = work;
      t.alpha = step(rho, nullptr);
      return norm(driving_forces(strain, theta, t, p).p_alpha) - p.r_alpha;
    };

    const double h = s.fd_step / dir_norm;
    const double slope = slope_of(phi_at, phi, h, false);
    const double rho = scale * newton_rho(phi, slope, dir_norm, s.delta_alpha_max, rep);

    work.alpha = step(rho, &rep);
    f = driving_forces(strain, theta, work, p);
    const double phi_new = norm(f.p_alpha) - p.r_alpha;
    const double next_scale = damp_oscillation(phi, phi_new, scale);
    if (next_scale < scale) rep.damping = true;
    scale = next_scale;
    phi = phi_new;
    rep.alpha.iterations = it;
    rep.alpha.residual = phi;
    rep.alpha_constraint = std::abs(work.alpha.norm_sq() - 1.0);
    if (std::abs(phi) <= tol) break;
  }
  return {work.alpha, rep};
}

namespace {

using Vec3d = std::array<double, 3>;

/// Orthonormal basis of the plane Σ x_i = 0, as the columns of a 4x3 array.
constexpr std::array<Vec4, 3> kSimplexBasis = [] {
  // Helmert basis.
  const double a = 0.70710678118654752440, b = 0.40824829046386301637, c = 0.28867513459481288225;
  return std::array<Vec4, 3>{Vec4{a, -a, 0.0, 0.0}, Vec4{b, b, -2.0 * b, 0.0}, Vec4{c, c, c, -3.0 * c}};
}();

Vec4 lift(const Vec4& anchor, const Vec3d& y) {
  Vec4 l = anchor;
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t i = 0; i < 4; ++i) l[i] += y[k] * kSimplexBasis[k][i];
  }
  return l;
}

Vec3d project(const Vec4& v) {
  Vec3d y{};
  for (std::size_t k = 0; k < 3; ++k) y[k] = dot(kSimplexBasis[k], v);
  return y;
}

double dot3(const Vec3d& a, const Vec3d& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

double norm3(const Vec3d& v) { return std::sqrt(dot3(v, v)); }

/// Solves the symmetric 3x3 system A x = b by Cholesky. Returns false if A is not
/// positive definite.
bool cholesky_solve(const std::array<Vec3d, 3>& a, const Vec3d& b, Vec3d& x) {
  std::array<Vec3d, 3> l{};
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double sum = a[i][j];
      for (std::size_t k = 0; k < j; ++k) sum -= l[i][k] * l[j][k];
      if (i == j) {
        if (!(sum > 0.0)) return false;
        l[i][i] = std::sqrt(sum);
      } else {
        l[i][j] = sum / l[j][j];
      }
    }
  }
  Vec3d z{};
  for (std::size_t i = 0; i < 3; ++i) {
    double sum = b[i];
    for (std::size_t k = 0; k < i; ++k) sum -= l[i][k] * z[k];
    z[i] = sum / l[i][i];
  }
  for (std::size_t i = 3; i-- > 0;) {
    double sum = z[i];
    for (std::size_t k = i + 1; k < 3; ++k) sum -= l[k][i] * x[k];
    x[i] = sum / l[i][i];
  }
  return true;
}

}  // namespace

LambdaUpdate evolve_lambda(const Sym3& strain, double theta, const MaterialState& state, const MaterialParams& p,
                           const SolverSettings& s, const PhaseFractions& start) {
  StepReport rep;
  const double tol = s.t_lambda(p);
  const double r = p.r_lambda;
  const Vec4 anchor = start.lambda();

  MaterialState probe = state;
  probe.fractions = start;
  const double phi_start = phi_lambda(strain, theta, probe, p);
  rep.lambda.residual = phi_start;
  if (phi_start <= tol) return {start, rep};
  rep.lambda.evolved = true;

  const auto interior = [&](const Vec4& l) {
    return std::all_of(l.begin(), l.end(), [&](double x) { return x > s.lambda_min && x < 1.0 - s.lambda_min; });
  };
  // Projected energy gradient Bᵀ ∂Ψ/∂λ; its norm is ‖p̄_λ‖.
  const auto gradient = [&](const Vec3d& y) {
    MaterialState t = state;
    t.fractions = PhaseFractions::from_fractions(lift(anchor, y));
    return project(d_free_energy(strain, theta, t, p).d_lambda);
  };
  // Incremental potential Ψ(λ) + r ‖λ - λ_start‖ on the plane Σλ = 1.
  const auto potential = [&](const Vec3d& y) {
    return free_energy(strain, theta, lift(anchor, y), state.alpha, state.eps_pl, state.kappa, p) + r * norm3(y);
  };

  // Starting point: the minimiser of the potential along the steepest-descent ray at the anchor,
  // where dG/dτ = r - ĝ·∂Ψ/∂λ changes sign. The penalty makes it positive near the simplex edge.
  const Vec3d g0 = gradient({0.0, 0.0, 0.0});
  const double g0n = norm3(g0);
  if (!(g0n > 0.0)) throw ConvergenceError("evolve_lambda: zero driving force", rep);
  const Vec3d ray{-g0[0] / g0n, -g0[1] / g0n, -g0[2] / g0n};
  const auto on_ray = [&](double tau) { return Vec3d{tau * ray[0], tau * ray[1], tau * ray[2]}; };
  const auto ray_slope = [&](double tau) {
    const Vec3d g = gradient(on_ray(tau));
    return r + g[0] * ray[0] + g[1] * ray[1] + g[2] * ray[2];
  };
  double lo = 0.0, hi = 1e-6;
  for (int k = 0; k < s.bracket_max_doublings; ++k) {
    if (!interior(lift(anchor, on_ray(hi))) || ray_slope(hi) >= 0.0) break;
    lo = hi;
    hi *= 2.0;
  }
  for (int k = 0; k < 60 && hi - lo > 1e-12 * hi; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (interior(lift(anchor, on_ray(mid))) && ray_slope(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  Vec3d y = on_ray(lo > 0.0 ? lo : 0.5 * hi);
  // A warm start from the current iterate wins if it is already lower.
  const Vec3d warm = project(axpy(state.fractions.lambda(), -1.0, anchor));
  if (norm3(warm) > 0.0 && interior(lift(anchor, warm)) && potential(warm) < potential(y)) y = warm;

  double phi = phi_start;
  for (int it = 1;; ++it) {
    if (it > s.max_iterations) throw ConvergenceError("evolve_lambda: iteration limit exceeded", rep);
    const Vec3d g = gradient(y);
    const double ny = norm3(y);
    const Vec3d u{y[0] / ny, y[1] / ny, y[2] / ny};
    // Stationarity of the incremental potential: Bᵀ∂Ψ/∂λ + r Δλ/‖Δλ‖ = 0.
    const Vec3d f{g[0] + r * u[0], g[1] + r * u[1], g[2] + r * u[2]};
    phi = norm3(g) - r;
    rep.lambda.iterations = it;
    rep.lambda.residual = phi;
    if (norm3(f) <= tol) break;

    // Hessian of the potential: FD Hessian of Ψ plus the curvature of the norm term.
    std::array<Vec3d, 3> hess{};
    const double h = s.fd_step;
    for (std::size_t k = 0; k < 3; ++k) {
      Vec3d yp = y, ym = y;
      yp[k] += h;
      ym[k] -= h;
      const Vec3d gp = gradient(yp), gm = gradient(ym);
      for (std::size_t i = 0; i < 3; ++i) hess[i][k] = (gp[i] - gm[i]) / (2.0 * h);
    }
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t k = 0; k < 3; ++k) {
        hess[i][k] += (r / ny) * ((i == k ? 1.0 : 0.0) - u[i] * u[k]);
      }
    }
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t k = 0; k < i; ++k) hess[i][k] = hess[k][i] = 0.5 * (hess[i][k] + hess[k][i]);
    }
    // Newton direction; on an indefinite Hessian shift the diagonal until it is definite.
    Vec3d d{};
    const Vec3d rhs{-f[0], -f[1], -f[2]};
    double shift = 0.0;
    const double diag_scale = std::abs(hess[0][0]) + std::abs(hess[1][1]) + std::abs(hess[2][2]) + 1.0;
    while (true) {
      auto m = hess;
      for (std::size_t i = 0; i < 3; ++i) m[i][i] += shift;
      if (cholesky_solve(m, rhs, d)) break;
      shift = shift == 0.0 ? 1e-6 * diag_scale : 10.0 * shift;
      ++rep.newton_fallbacks;
    }

    // Armijo backtracking on the potential, staying inside the simplex. Once the predicted
    // decrease is below the round-off of the potential the comparison is meaningless and the full
    // step is taken; the gradient test above still decides convergence.
    const double pot = potential(y);
    const double slope = dot3(f, d);
    const double noise = 1e-13 * (1.0 + std::abs(pot));
    const auto admissible = [&](const Vec3d& x) { return dot3(x, y) > 0.0 && interior(lift(anchor, x)); };
    double t = 1.0;
    Vec3d next{y[0] + d[0], y[1] + d[1], y[2] + d[2]};
    if (!(-slope <= noise && admissible(next))) {
      bool accepted = false;
      for (int bt = 0; bt <= s.max_backtracks; ++bt, t *= 0.5) {
        next = {y[0] + t * d[0], y[1] + t * d[1], y[2] + t * d[2]};
        // Never cross the kink of the norm term at Δλ = 0.
        if (!admissible(next)) continue;
        if (potential(next) <= pot + 1e-4 * t * slope) {
          accepted = true;
          break;
        }
      }
      if (!accepted) throw ConvergenceError("evolve_lambda: line search failed", rep);
    }
    if (t < 1.0) rep.damping = true;
    y = next;
  }

  int clamps = 0;
  const Vec4 raw = lift(anchor, y);
  rep.lambda_sum = std::abs(fraction_sum(raw) - 1.0);
  const PhaseFractions out = PhaseFractions::from_fractions_clamped(raw, s.lambda_min, &clamps);
  rep.lambda_clamps += clamps;
  return {out, rep};
}

LambdaUpdate evolve_lambda(const Sym3& strain, double theta, const MaterialState& state, const MaterialParams& p,
                           const SolverSettings& s) {
  return evolve_lambda(strain, theta, state, p, s, state.fractions);
}

PlasticUpdate evolve_plastic(const Sym3& strain, double theta, const MaterialState& state, const MaterialParams& p,
                             const SolverSettings& s, const Sym3& eps_pl_start, double kappa_start, bool active) {
  StepReport rep;
  const double tol = s.t_plastic(p);
  MaterialState work = state;

  DrivingForces f = driving_forces(strain, theta, work, p);
  double phi = norm(f.dev_stress) - (p.r_plastic + f.mu);
  rep.plastic.residual = phi;
  if (phi <= tol && !(active && phi < -tol)) return {work.eps_pl, work.kappa, rep};
  rep.plastic.evolved = true;

  for (int it = 1;; ++it) {
    if (it > s.max_iterations) throw ConvergenceError("evolve_plastic: iteration limit exceeded", rep);

    const Sym3 dir = f.dev_stress;
    const double dir_norm = norm(dir);
    if (!(dir_norm > 0.0)) throw ConvergenceError("evolve_plastic: zero driving force", rep);
    const auto trial = [&](double rho) {
      MaterialState t = work;
      t.eps_pl = work.eps_pl + rho * dir;
      t.kappa = kappa_start + norm(t.eps_pl - eps_pl_start);
      return t;
    };
    const auto phi_at = [&](double rho) { return phi_plastic(strain, theta, trial(rho), p); };

    // ‖Δε_pl‖ has a kink at zero increment; a one-sided difference sees the hardening.
    const bool at_start = work.eps_pl == eps_pl_start;
    const double h = s.fd_step / dir_norm;
    const double slope = slope_of(phi_at, phi, h, at_start);
    const double rho = newton_rho(phi, slope, dir_norm, 1e-4, rep);

    work = trial(rho);
    f = driving_forces(strain, theta, work, p);
    phi = norm(f.dev_stress) - (p.r_plastic + f.mu);
    rep.plastic.iterations = it;
    rep.plastic.residual = phi;
    if (std::abs(phi) <= tol) break;
  }
  return {work.eps_pl, work.kappa, rep};
}

PlasticUpdate evolve_plastic(const Sym3& strain, double theta, const MaterialState& state, const MaterialParams& p,
                             const SolverSettings& s) {
  return evolve_plastic(strain, theta, state, p, s, state.eps_pl, state.kappa);
}

RelaxResult relax(const Sym3& strain, double theta, const MaterialState& state, const MaterialParams& p,
                  const SolverSettings& s) {
  StepReport rep;
  MaterialState work = state;
  const double t_l = s.t_lambda(p), t_a = s.t_alpha(p), t_p = s.t_plastic(p);
  // A channel that has moved in this increment must end on its flow surface, not inside.
  const auto settled = [](double phi, double tol, bool moved) { return phi <= tol && !(moved && phi < -tol); };
  // Every channel is anchored at the increment start, so "moved" means away from it.
  const auto plastic_moved = [&] { return !(work.eps_pl == state.eps_pl) || work.kappa != state.kappa; };
  const auto lambda_moved = [&] { return !(work.fractions == state.fractions); };
  const auto alpha_moved = [&] { return !(work.alpha == state.alpha); };

  for (int pass = 0;; ++pass) {
    const YieldValues y = yield_functions(driving_forces(strain, theta, work, p), p);
    rep.lambda.residual = y.lambda;
    rep.alpha.residual = y.alpha;
    rep.plastic.residual = y.plastic;
    if (settled(y.plastic, t_p, plastic_moved()) && settled(y.lambda, t_l, lambda_moved()) &&
        settled(y.alpha, t_a, alpha_moved())) {
      rep.outer_passes = pass;
      rep.plastic.evolved = plastic_moved();
      rep.lambda.evolved = lambda_moved();
      rep.alpha.evolved = alpha_moved();
      rep.alpha_constraint = std::abs(work.alpha.norm_sq() - 1.0);
      return {work, rep};
    }
    if (pass == s.max_outer_passes) throw ConvergenceError("relax: outer coupling loop did not settle", rep);

    // A channel left inside its domain by the others' moves reverts to the increment start when
    // that is admissible (zero net step); only otherwise is it pulled back onto the surface.
    if (plastic_moved() && y.plastic < -t_p) {
      MaterialState probe = work;
      probe.eps_pl = state.eps_pl;
      probe.kappa = state.kappa;
      if (phi_plastic(strain, theta, probe, p) <= t_p) work = probe;
    }
    const PlasticUpdate pu = evolve_plastic(strain, theta, work, p, s, state.eps_pl, state.kappa, plastic_moved());
    work.eps_pl = pu.eps_pl;
    work.kappa = pu.kappa;
    rep.merge(pu.report);

    const LambdaUpdate lu = evolve_lambda(strain, theta, work, p, s, state.fractions);
    work.fractions = lu.fractions;
    rep.merge(lu.report);

    if (alpha_moved() && norm(driving_forces(strain, theta, work, p).p_alpha) - p.r_alpha < -t_a) {
      MaterialState probe = work;
      probe.alpha = state.alpha;
      if (norm(driving_forces(strain, theta, probe, p).p_alpha) - p.r_alpha <= t_a) work = probe;
    }
    const AlphaUpdate au = evolve_alpha(strain, theta, work, p, s, alpha_moved());
    work.alpha = au.alpha;
    rep.merge(au.report);
  }
}

}  // namespace sma
