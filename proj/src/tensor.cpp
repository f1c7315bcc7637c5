#include "sma/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sma/errors.hpp"

namespace sma {

namespace {

constexpr int kSymIndex[3][3] = {{0, 3, 4}, {3, 1, 5}, {4, 5, 2}};

}  // namespace

double Sym3::operator()(int i, int j) const { return c_[kSymIndex[i][j]]; }

Sym3& Sym3::operator+=(const Sym3& o) {
  for (std::size_t k = 0; k < 6; ++k) c_[k] += o.c_[k];
  return *this;
}

Sym3& Sym3::operator-=(const Sym3& o) {
  for (std::size_t k = 0; k < 6; ++k) c_[k] -= o.c_[k];
  return *this;
}

Sym3& Sym3::operator*=(double s) {
  for (auto& v : c_) v *= s;
  return *this;
}

Sym3 operator+(Sym3 a, const Sym3& b) { return a += b; }
Sym3 operator-(Sym3 a, const Sym3& b) { return a -= b; }
Sym3 operator-(const Sym3& a) { return -1.0 * a; }
Sym3 operator*(double s, Sym3 a) { return a *= s; }
Sym3 operator*(Sym3 a, double s) { return a *= s; }

double ddot(const Sym3& a, const Sym3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + 2.0 * (a[3] * b[3] + a[4] * b[4] + a[5] * b[5]);
}

double norm(const Sym3& a) { return std::sqrt(ddot(a, a)); }

double trace(const Sym3& a) { return a[0] + a[1] + a[2]; }

Sym3 dev(const Sym3& a) {
  const double p = trace(a) / 3.0;
  return {a[0] - p, a[1] - p, a[2] - p, a[3], a[4], a[5]};
}

Mat3 Mat3::from_columns(const Vec3& c0, const Vec3& c1, const Vec3& c2) {
  Mat3 m;
  m.set_column(0, c0);
  m.set_column(1, c1);
  m.set_column(2, c2);
  return m;
}

Mat3 Mat3::from_sym(const Sym3& s) {
  return Mat3({s[0], s[3], s[4], s[3], s[1], s[5], s[4], s[5], s[2]});
}

void Mat3::set_column(int j, const Vec3& v) {
  m_[j] = v[0];
  m_[3 + j] = v[1];
  m_[6 + j] = v[2];
}

Mat3 operator*(const Mat3& a, const Mat3& b) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = a(i, 0) * b(0, j) + a(i, 1) * b(1, j) + a(i, 2) * b(2, j);
  return r;
}

Mat3 operator+(const Mat3& a, const Mat3& b) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = a(i, j) + b(i, j);
  return r;
}

Mat3 operator-(const Mat3& a, const Mat3& b) { return a + (-1.0) * b; }

Mat3 operator*(double s, const Mat3& a) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = s * a(i, j);
  return r;
}

Mat3 transpose(const Mat3& a) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = a(j, i);
  return r;
}

double det(const Mat3& a) {
  return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
         a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
         a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

double ddot(const Mat3& a, const Mat3& b) {
  const auto& x = a.data();
  const auto& y = b.data();
  return std::inner_product(x.begin(), x.end(), y.begin(), 0.0);
}

double max_abs_diff(const Mat3& a, const Mat3& b) {
  double m = 0.0;
  for (int k = 0; k < 9; ++k) m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
  return m;
}

Sym3 sym(const Mat3& a) {
  return {a(0, 0),
          a(1, 1),
          a(2, 2),
          0.5 * (a(0, 1) + a(1, 0)),
          0.5 * (a(0, 2) + a(2, 0)),
          0.5 * (a(1, 2) + a(2, 1))};
}

Sym3 rotate_transposed(const Mat3& q, const Sym3& s) {
  return sym(transpose(q) * Mat3::from_sym(s) * q);
}

Sym3 rotate(const Mat3& q, const Sym3& s) { return sym(q * Mat3::from_sym(s) * transpose(q)); }

IsoStiffness IsoStiffness::from_young_poisson(double young, double poisson) {
  if (!(young > 0.0) || !(poisson > -1.0) || !(poisson < 0.5)) {
    throw ValidationError("isotropic stiffness requires E > 0 and -1 < nu < 0.5");
  }
  return {young / (3.0 * (1.0 - 2.0 * poisson)), young / (2.0 * (1.0 + poisson))};
}

IsoStiffness IsoStiffness::from_bulk_shear(double bulk, double shear) {
  if (!(bulk > 0.0) || !(shear > 0.0)) {
    throw ValidationError("isotropic stiffness requires positive bulk and shear moduli");
  }
  return {bulk, shear};
}

double IsoStiffness::young() const { return 9.0 * bulk_ * shear_ / (3.0 * bulk_ + shear_); }

double IsoStiffness::poisson() const {
  return (3.0 * bulk_ - 2.0 * shear_) / (2.0 * (3.0 * bulk_ + shear_));
}

Sym3 IsoStiffness::apply(const Sym3& e) const {
  return bulk_ * trace(e) * Sym3::identity() + 2.0 * shear_ * dev(e);
}

Sym3 IsoStiffness::apply_inverse(const Sym3& s) const {
  return (trace(s) / (9.0 * bulk_)) * Sym3::identity() + (0.5 / shear_) * dev(s);
}

std::array<double, 36> IsoStiffness::voigt_matrix() const {
  const double lame = bulk_ - 2.0 * shear_ / 3.0;
  std::array<double, 36> m{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) m[6 * i + j] = lame;
    m[6 * i + i] = lame + 2.0 * shear_;
  }
  for (int i = 3; i < 6; ++i) m[6 * i + i] = shear_;
  return m;
}

IsoStiffness reuss_effective(std::span<const double, 4> fractions,
                             std::span<const IsoStiffness, 4> phases) {
  double bulk_compliance = 0.0;
  double shear_compliance = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    bulk_compliance += fractions[i] / phases[i].bulk();
    shear_compliance += fractions[i] / phases[i].shear();
  }
  if (!(bulk_compliance > 0.0) || !(shear_compliance > 0.0)) {
    throw InternalError("Reuss mixture: singular compliance accumulation");
  }
  return IsoStiffness::from_bulk_shear(1.0 / bulk_compliance, 1.0 / shear_compliance);
}

Sym3 variant_strain(int k, double eta_hat, double nu_hat) {
  if (k == 0) return {};
  Sym3 eta = Sym3::diagonal(-nu_hat, -nu_hat, -nu_hat);
  eta[static_cast<std::size_t>(k - 1)] = 1.0;
  return eta_hat * eta;
}

Sym3 effective_eta(std::span<const double, 4> fractions, double eta_hat, double nu_hat) {
  Sym3 eta;
  for (int k = 1; k < 4; ++k) eta += fractions[static_cast<std::size_t>(k)] * variant_strain(k, eta_hat, nu_hat);
  return eta;
}

EigenSystem jacobi_eigen(const Sym3& e) {
  Mat3 a = Mat3::from_sym(e);
  Mat3 v = Mat3::identity();

  const double scale = norm(e);
  constexpr int kMaxSweeps = 100;
  constexpr int kPairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};

  int sweep = 0;
  for (;; ++sweep) {
    const double off = std::sqrt(2.0 * (a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2)));
    if (off <= 1e-15 * scale) break;
    if (sweep == kMaxSweeps) throw InternalError("jacobi_eigen: no convergence in 100 sweeps");

    for (const auto& pq : kPairs) {
      const int p = pq[0];
      const int q = pq[1];
      const double apq = a(p, q);
      if (apq == 0.0) continue;
      const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
      const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
      const double c = 1.0 / std::sqrt(t * t + 1.0);
      const double s = t * c;

      Mat3 j = Mat3::identity();
      j(p, p) = c;
      j(q, q) = c;
      j(p, q) = s;
      j(q, p) = -s;
      a = transpose(j) * a * j;
      a(p, q) = 0.0;
      a(q, p) = 0.0;
      v = v * j;
    }
  }

  std::array<int, 3> order{0, 1, 2};
  // Eigenvalues equal up to round-off count as tied and keep the identity ordering.
  const double tie = 1e-12 * scale;
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return a(x, x) > a(y, y) + tie; });

  EigenSystem out;
  for (int k = 0; k < 3; ++k) {
    const int src = order[static_cast<std::size_t>(k)];
    out.values[static_cast<std::size_t>(k)] = a(src, src);
    Vec3 col = v.column(src);
    for (double comp : col) {
      if (std::abs(comp) > 1e-12) {
        if (comp < 0.0)
          for (double& x : col) x = -x;
        break;
      }
    }
    out.vectors.set_column(k, col);
  }
  if (det(out.vectors) < 0.0) {
    Vec3 last = out.vectors.column(2);
    for (double& x : last) x = -x;
    out.vectors.set_column(2, last);
  }
  return out;
}

}  // namespace sma
