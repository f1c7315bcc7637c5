#include "sma/material_state.hpp"

#include <algorithm>
#include <cmath>

#include "sma/errors.hpp"

namespace sma {

double sigmoid(double chi) { return 1.0 / (1.0 + std::exp(-chi)); }

double logit(double lambda) { return std::log(lambda / (1.0 - lambda)); }

double fraction_sum(const Vec4& lambda) { return ((lambda[0] + lambda[1]) + lambda[2]) + lambda[3]; }

namespace {

Vec4 close_sum(const Vec4& raw) {
  const double s = fraction_sum(raw);
  Vec4 l{raw[0] / s, raw[1] / s, raw[2] / s, 0.0};
  // fl(s3 + fl(1 - s3)) == 1 for any s3 in (0, 1), so the canonical sum is exact.
  l[3] = 1.0 - ((l[0] + l[1]) + l[2]);
  return l;
}

Vec4 logits_of(const Vec4& l) {
  return {logit(l[0]), logit(l[1]), logit(l[2]), logit(l[3])};
}

}  // namespace

PhaseFractions::PhaseFractions() : PhaseFractions(from_fractions({0.97, 0.01, 0.01, 0.01})) {}

PhaseFractions PhaseFractions::from_fractions(const Vec4& lambda) {
  for (double x : lambda) {
    if (!(x > 0.0) || !(x < 1.0)) throw DomainError("volume fractions must lie strictly inside (0, 1)");
  }
  const Vec4 l = close_sum(lambda);
  for (double x : l) {
    if (!(x > 0.0) || !(x < 1.0)) throw DomainError("volume fractions must lie strictly inside (0, 1)");
  }
  return {l, logits_of(l)};
}

PhaseFractions PhaseFractions::from_logits(const Vec4& chi) {
  return from_fractions({sigmoid(chi[0]), sigmoid(chi[1]), sigmoid(chi[2]), sigmoid(chi[3])});
}

PhaseFractions PhaseFractions::from_fractions_clamped(const Vec4& lambda, double floor, int* clamped) {
  int count = 0;
  Vec4 l = lambda;
  for (double& x : l) {
    const double c = std::clamp(x, floor, 1.0 - floor);
    if (c != x || std::isnan(x)) ++count;
    x = std::isnan(x) ? floor : c;
  }
  Vec4 closed = close_sum(l);
  // The closing entry can fall below the floor when the others were clamped high.
  if (!(closed[3] >= floor)) {
    ++count;
    l[3] = floor;
    closed = close_sum(l);
  }
  if (clamped) *clamped = count;
  return {closed, logits_of(closed)};
}

MaterialState MaterialState::austenitic(double delta) {
  return with_fractions({1.0 - 3.0 * delta, delta, delta, delta});
}

MaterialState MaterialState::twinned_martensite(double delta) {
  const double m = (1.0 - delta) / 3.0;
  return with_fractions({delta, m, m, m});
}

MaterialState MaterialState::with_fractions(const Vec4& lambda) {
  MaterialState s;
  s.fractions = PhaseFractions::from_fractions(lambda);
  return s;
}

}  // namespace sma
