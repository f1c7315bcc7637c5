#include "sma/rotations.hpp"

#include <algorithm>
#include <cmath>

#include "sma/errors.hpp"

namespace sma {

Mat3 rotation_from_quat(const Quat& alpha) {
  const double a = alpha.a(), b = alpha.b(), c = alpha.c(), d = alpha.d();
  return Mat3({a * a + b * b - c * c - d * d, 2.0 * (b * c - a * d), 2.0 * (b * d + a * c),
               2.0 * (b * c + a * d), a * a + c * c - b * b - d * d, 2.0 * (c * d - a * b),
               2.0 * (b * d - a * c), 2.0 * (c * d + a * b), a * a + d * d - b * b - c * c});
}

std::array<Mat3, 4> d_rotation_d_quat(const Quat& alpha) {
  const double a = 2.0 * alpha.a(), b = 2.0 * alpha.b(), c = 2.0 * alpha.c(), d = 2.0 * alpha.d();
  return {Mat3({a, -d, c, d, a, -b, -c, b, a}),   //
          Mat3({b, c, d, c, -b, -a, d, a, -b}),   //
          Mat3({-c, b, a, b, c, d, -a, d, -c}),   //
          Mat3({-d, -a, b, a, -d, c, b, c, d})};
}

Quat quat_from_rotation(const Mat3& r) {
  const Mat3 gram = transpose(r) * r;
  if (max_abs_diff(gram, Mat3::identity()) > 1e-8 || std::abs(det(r) - 1.0) > 1e-8) {
    throw ValidationError("quat_from_rotation: matrix is not a proper rotation");
  }

  const double tr = r(0, 0) + r(1, 1) + r(2, 2);
  const std::array<double, 4> pivots{tr, r(0, 0), r(1, 1), r(2, 2)};
  const auto branch = std::distance(pivots.begin(), std::max_element(pivots.begin(), pivots.end()));

  Vec4 q{};
  switch (branch) {
    case 0: {
      const double a = 0.5 * std::sqrt(1.0 + tr);
      q = {a, (r(2, 1) - r(1, 2)) / (4.0 * a), (r(0, 2) - r(2, 0)) / (4.0 * a),
           (r(1, 0) - r(0, 1)) / (4.0 * a)};
      break;
    }
    case 1: {
      const double b = 0.5 * std::sqrt(1.0 + 2.0 * r(0, 0) - tr);
      q = {(r(2, 1) - r(1, 2)) / (4.0 * b), b, (r(0, 1) + r(1, 0)) / (4.0 * b),
           (r(0, 2) + r(2, 0)) / (4.0 * b)};
      break;
    }
    case 2: {
      const double c = 0.5 * std::sqrt(1.0 + 2.0 * r(1, 1) - tr);
      q = {(r(0, 2) - r(2, 0)) / (4.0 * c), (r(0, 1) + r(1, 0)) / (4.0 * c), c,
           (r(1, 2) + r(2, 1)) / (4.0 * c)};
      break;
    }
    default: {
      const double d = 0.5 * std::sqrt(1.0 + 2.0 * r(2, 2) - tr);
      q = {(r(1, 0) - r(0, 1)) / (4.0 * d), (r(0, 2) + r(2, 0)) / (4.0 * d),
           (r(1, 2) + r(2, 1)) / (4.0 * d), d};
      break;
    }
  }

  // a >= 0; for a == 0 the first non-zero component decides.
  for (double x : q) {
    if (x != 0.0) {
      if (x < 0.0)
        for (double& y : q) y = -y;
      break;
    }
  }
  const double n = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
  for (double& y : q) y /= n;
  return Quat(q);
}

}  // namespace sma
