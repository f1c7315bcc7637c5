#pragma once

#include "sma/rotations.hpp"
#include "sma/tensor.hpp"

namespace sma {

inline constexpr int kPhaseCount = 4;

/// Volume fractions of austenite (index 0) and the three martensite variants, held
/// together with their logit coordinates chi (lambda_i = 1 / (1 + exp(-chi_i))).
///
/// Construction closes the sum: lambda_3 is set to 1 - (lambda_0 + lambda_1 + lambda_2),
/// so fraction_sum() evaluates to exactly 1.0. chi is recomputed from the closed
/// fractions.
class PhaseFractions {
 public:
  PhaseFractions();

  /// Normalizes `lambda` by its sum. Throws DomainError if a normalized entry is not
  /// strictly inside (0, 1).
  static PhaseFractions from_fractions(const Vec4& lambda);
  /// Sigmoid of `chi`, then normalized as above.
  static PhaseFractions from_logits(const Vec4& chi);
  /// As from_fractions, but entries are first clamped to [floor, 1 - floor].
  /// Returns the number of clamped entries through `clamped` when non-null.
  static PhaseFractions from_fractions_clamped(const Vec4& lambda, double floor, int* clamped = nullptr);

  const Vec4& lambda() const { return lambda_; }
  const Vec4& chi() const { return chi_; }
  double operator[](int i) const { return lambda_[static_cast<std::size_t>(i)]; }

  friend bool operator==(const PhaseFractions&, const PhaseFractions&) = default;

 private:
  PhaseFractions(const Vec4& lambda, const Vec4& chi) : lambda_(lambda), chi_(chi) {}
  Vec4 lambda_;
  Vec4 chi_;
};

/// Canonical left-to-right sum used everywhere Σλ is checked.
double fraction_sum(const Vec4& lambda);

double sigmoid(double chi);
double logit(double lambda);

/// Internal-variable set (λ/χ, α, ε_pl, κ) of one material point plus the cached stress.
struct MaterialState {
  PhaseFractions fractions;
  Quat alpha;
  Sym3 eps_pl;
  double kappa = 0.0;
  Sym3 stress;
  bool initialized = false;

  /// λ = [1 - 3δ, δ, δ, δ]
  static MaterialState austenitic(double delta = 0.01);
  /// λ = [δ, (1 - δ)/3, (1 - δ)/3, (1 - δ)/3]
  static MaterialState twinned_martensite(double delta = 0.01);
  static MaterialState with_fractions(const Vec4& lambda);

  friend bool operator==(const MaterialState&, const MaterialState&) = default;
};

}  // namespace sma
