#pragma once

// Small dense algebra for 3x3 tensors used by the material kernel.
//
// Symmetric tensors are stored as six independent components in the order
// (11, 22, 33, 12, 13, 23). All shear components are *tensor* components, never
// engineering shears; double contractions weight the off-diagonal terms by 2.

#include <array>
#include <cstddef>
#include <span>

namespace sma {

using Vec3 = std::array<double, 3>;
using Vec4 = std::array<double, 4>;

class Sym3 {
 public:
  constexpr Sym3() = default;
  constexpr Sym3(double xx, double yy, double zz, double xy, double xz, double yz)
      : c_{xx, yy, zz, xy, xz, yz} {}
  explicit constexpr Sym3(const std::array<double, 6>& c) : c_(c) {}

  static constexpr Sym3 identity() { return {1.0, 1.0, 1.0, 0.0, 0.0, 0.0}; }
  static constexpr Sym3 diagonal(double a, double b, double c) { return {a, b, c, 0.0, 0.0, 0.0}; }

  constexpr double operator[](std::size_t k) const { return c_[k]; }
  constexpr double& operator[](std::size_t k) { return c_[k]; }

  /// Component (i, j), zero-based, either triangle.
  double operator()(int i, int j) const;

  constexpr const std::array<double, 6>& components() const { return c_; }

  Sym3& operator+=(const Sym3& o);
  Sym3& operator-=(const Sym3& o);
  Sym3& operator*=(double s);

  friend bool operator==(const Sym3&, const Sym3&) = default;

 private:
  std::array<double, 6> c_{};
};

Sym3 operator+(Sym3 a, const Sym3& b);
Sym3 operator-(Sym3 a, const Sym3& b);
Sym3 operator-(const Sym3& a);
Sym3 operator*(double s, Sym3 a);
Sym3 operator*(Sym3 a, double s);

/// A : B with off-diagonal terms counted twice.
double ddot(const Sym3& a, const Sym3& b);
double norm(const Sym3& a);
double trace(const Sym3& a);
Sym3 dev(const Sym3& a);

/// General 3x3 matrix, row-major.
class Mat3 {
 public:
  constexpr Mat3() = default;
  explicit constexpr Mat3(const std::array<double, 9>& m) : m_(m) {}

  static constexpr Mat3 identity() { return Mat3({1, 0, 0, 0, 1, 0, 0, 0, 1}); }
  static Mat3 from_columns(const Vec3& c0, const Vec3& c1, const Vec3& c2);
  static Mat3 from_sym(const Sym3& s);

  constexpr double operator()(int i, int j) const { return m_[3 * i + j]; }
  constexpr double& operator()(int i, int j) { return m_[3 * i + j]; }

  Vec3 column(int j) const { return {m_[j], m_[3 + j], m_[6 + j]}; }
  void set_column(int j, const Vec3& v);

  constexpr const std::array<double, 9>& data() const { return m_; }

  friend bool operator==(const Mat3&, const Mat3&) = default;

 private:
  std::array<double, 9> m_{};
};

Mat3 operator*(const Mat3& a, const Mat3& b);
Mat3 operator+(const Mat3& a, const Mat3& b);
Mat3 operator-(const Mat3& a, const Mat3& b);
Mat3 operator*(double s, const Mat3& a);
Mat3 transpose(const Mat3& a);
double det(const Mat3& a);
/// A : B = sum_ij A_ij B_ij.
double ddot(const Mat3& a, const Mat3& b);
/// Largest absolute entry of A - B.
double max_abs_diff(const Mat3& a, const Mat3& b);
/// Symmetric part (A + A^T) / 2.
Sym3 sym(const Mat3& a);

/// Q^T . S . Q
Sym3 rotate_transposed(const Mat3& q, const Sym3& s);
/// Q . S . Q^T
Sym3 rotate(const Mat3& q, const Sym3& s);

/// Isotropic linear elasticity stored as bulk and shear moduli.
class IsoStiffness {
 public:
  constexpr IsoStiffness() = default;
  /// Throws ValidationError unless E > 0 and -1 < nu < 0.5.
  static IsoStiffness from_young_poisson(double young, double poisson);
  /// Throws ValidationError unless both moduli are positive.
  static IsoStiffness from_bulk_shear(double bulk, double shear);

  constexpr double bulk() const { return bulk_; }
  constexpr double shear() const { return shear_; }
  double young() const;
  double poisson() const;

  /// C : e
  Sym3 apply(const Sym3& e) const;
  /// C^{-1} : s
  Sym3 apply_inverse(const Sym3& s) const;

  /// 6x6 matrix d(sigma)/d(strain) in Voigt order (11,22,33,12,13,23) with engineering
  /// shear strains, row-major. This is the layout a UMAT host expects for DDSDDE.
  std::array<double, 36> voigt_matrix() const;

 private:
  constexpr IsoStiffness(double k, double g) : bulk_(k), shear_(g) {}
  double bulk_ = 0.0;
  double shear_ = 0.0;
};

inline Sym3 apply_stiffness(const IsoStiffness& c, const Sym3& e) { return c.apply(e); }

/// Reuss (compliance-averaged) mixture [sum_i w_i C_i^{-1}]^{-1}. Weights may touch 0 and 1.
IsoStiffness reuss_effective(std::span<const double, 4> fractions,
                             std::span<const IsoStiffness, 4> phases);

/// Transformation strain of phase k (0 = austenite, 1..3 = martensite variants).
Sym3 variant_strain(int k, double eta_hat, double nu_hat);

/// sum_i w_i eta_i
Sym3 effective_eta(std::span<const double, 4> fractions, double eta_hat, double nu_hat);

struct EigenSystem {
  Vec3 values;   ///< descending
  Mat3 vectors;  ///< columns are unit eigenvectors, det = +1
};

/// Cyclic Jacobi eigen-solver for symmetric 3x3 tensors.
///
/// Eigenvalues come back in descending order. Each eigenvector is signed so its first
/// non-negligible component is positive; afterwards the last column is flipped if needed
/// so that the basis is right-handed. Diagonal (including zero) input yields the
/// identity basis, permuted only by the sort (ties keep their original order).
EigenSystem jacobi_eigen(const Sym3& e);

}  // namespace sma
