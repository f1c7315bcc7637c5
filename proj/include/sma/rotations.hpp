#pragma once

// Euler-Rodrigues (unit quaternion) parameterization of the mean martensite orientation.

#include <array>

#include "sma/tensor.hpp"

namespace sma {

/// Euler-Rodrigues parameters [a, b, c, d]. Unit norm is an invariant of accepted
/// states; intermediate iterates may drift off the sphere.
struct Quat {
  Vec4 v{1.0, 0.0, 0.0, 0.0};

  constexpr Quat() = default;
  constexpr Quat(double a, double b, double c, double d) : v{a, b, c, d} {}
  explicit constexpr Quat(const Vec4& x) : v(x) {}

  constexpr double a() const { return v[0]; }
  constexpr double b() const { return v[1]; }
  constexpr double c() const { return v[2]; }
  constexpr double d() const { return v[3]; }

  double norm_sq() const { return v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3]; }

  friend bool operator==(const Quat&, const Quat&) = default;
};

/// Q(alpha) with the entries
///   [a²+b²-c²-d²   2(bc-ad)      2(bd+ac)   ]
///   [2(bc+ad)      a²+c²-b²-d²   2(cd-ab)   ]
///   [2(bd-ac)      2(cd+ab)      a²+d²-b²-c²]
/// A proper rotation for unit alpha; evaluated as written otherwise.
Mat3 rotation_from_quat(const Quat& alpha);

/// Partial derivatives dQ/da, dQ/db, dQ/dc, dQ/dd of rotation_from_quat.
std::array<Mat3, 4> d_rotation_d_quat(const Quat& alpha);

/// Spurrier's extraction: branches on the largest of trace(R) and diag(R). Returns the
/// representative with a >= 0. Throws ValidationError if R is not a proper rotation
/// within 1e-8.
Quat quat_from_rotation(const Mat3& r);

}  // namespace sma
