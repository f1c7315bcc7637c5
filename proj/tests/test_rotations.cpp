#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "sma/errors.hpp"
#include "sma/rotations.hpp"

using namespace sma;

namespace {

Quat random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Vec4 v{n(rng), n(rng), n(rng), n(rng)};
  const double s = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3]);
  for (double& x : v) x /= s;
  return Quat(v);
}

Mat3 rot_z(double t) { return Mat3({std::cos(t), -std::sin(t), 0, std::sin(t), std::cos(t), 0, 0, 0, 1}); }

}  // namespace

TEST(RotationFromQuat, IdentityQuaternion) { EXPECT_EQ(rotation_from_quat(Quat{}), Mat3::identity()); }

TEST(RotationFromQuat, AboutZMatchesAxisAngle) {
  for (double t : {0.1, 0.7, 1.3, 2.9, -0.4}) {
    const Quat q(std::cos(t / 2), 0, 0, std::sin(t / 2));
    EXPECT_LT(max_abs_diff(rotation_from_quat(q), rot_z(t)), 1e-15);
  }
}

TEST(RotationFromQuat, ProperOrthogonalForUnitQuaternions) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const Mat3 q = rotation_from_quat(random_unit(rng));
    EXPECT_LT(max_abs_diff(q * transpose(q), Mat3::identity()), 1e-12);
    EXPECT_NEAR(det(q), 1.0, 1e-12);
  }
}

TEST(RotationDerivative, AtIdentity) {
  const auto d = d_rotation_d_quat(Quat{});
  EXPECT_EQ(d[0], 2.0 * Mat3::identity());
}

TEST(RotationDerivative, MatchesFiniteDifferences) {
  std::mt19937_64 rng(17);
  const double h = 1e-6;
  double worst = 0.0;
  for (int n = 0; n < 100; ++n) {
    const Quat q = random_unit(rng);
    const auto d = d_rotation_d_quat(q);
    for (std::size_t i = 0; i < 4; ++i) {
      Quat up = q, dn = q;
      up.v[i] += h;
      dn.v[i] -= h;
      const Mat3 fd = (1.0 / (2 * h)) * (rotation_from_quat(up) - rotation_from_quat(dn));
      worst = std::max(worst, max_abs_diff(fd, d[i]));
    }
  }
  EXPECT_LT(worst, 1e-7);
}

TEST(RotationDerivative, LinearInQuaternion) {
  std::mt19937_64 rng(19);
  const Quat a = random_unit(rng), b = random_unit(rng);
  const Quat sum(a.a() + b.a(), a.b() + b.b(), a.c() + b.c(), a.d() + b.d());
  const auto da = d_rotation_d_quat(a), db = d_rotation_d_quat(b), ds = d_rotation_d_quat(sum);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_LT(max_abs_diff(ds[i], da[i] + db[i]), 1e-14);
}

TEST(QuatFromRotation, Identity) { EXPECT_EQ(quat_from_rotation(Mat3::identity()), (Quat{1, 0, 0, 0})); }

TEST(QuatFromRotation, NinetyDegreesAboutZ) {
  const Quat q = quat_from_rotation(rot_z(std::numbers::pi / 2));
  EXPECT_NEAR(q.a(), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(q.b(), 0.0, 1e-15);
  EXPECT_NEAR(q.c(), 0.0, 1e-15);
  EXPECT_NEAR(q.d(), std::sqrt(0.5), 1e-15);
}

TEST(QuatFromRotation, RoundTripWithNonNegativeScalar) {
  std::mt19937_64 rng(23);
  for (int n = 0; n < 500; ++n) {
    Quat q = random_unit(rng);
    const Quat back = quat_from_rotation(rotation_from_quat(q));
    if (q.a() < 0) q = Quat(-q.a(), -q.b(), -q.c(), -q.d());
    EXPECT_GE(back.a(), 0.0);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(back.v[i], q.v[i], 1e-10);
  }
}

TEST(QuatFromRotation, HalfTurnsUseLargestDiagonalBranch) {
  for (const Mat3& r : {Mat3({1, 0, 0, 0, -1, 0, 0, 0, -1}), Mat3({-1, 0, 0, 0, 1, 0, 0, 0, -1}),
                        Mat3({-1, 0, 0, 0, -1, 0, 0, 0, 1})}) {
    const Quat q = quat_from_rotation(r);
    EXPECT_NEAR(q.norm_sq(), 1.0, 1e-15);
    EXPECT_LT(max_abs_diff(rotation_from_quat(q), r), 1e-15);
  }
}

TEST(QuatFromRotation, RejectsImproperMatrices) {
  EXPECT_THROW(quat_from_rotation(Mat3({-1, 0, 0, 0, 1, 0, 0, 0, 1})), ValidationError);
  EXPECT_THROW(quat_from_rotation(2.0 * Mat3::identity()), ValidationError);
}
