#include <random>

#include <gtest/gtest.h>

#include "ami/error.hpp"
#include "ami/spatial.hpp"
#include "oracles.hpp"

using namespace ami;

namespace {

Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  return q.normalized().toRotationMatrix();
}

}  // namespace

TEST(Spatial, SkewMatchesCrossProduct) {
  const Vec3 v(0.3, -1.2, 2.5), w(-0.7, 0.4, 1.1);
  EXPECT_LT((skew(v) * w - v.cross(w)).norm(), 1e-15);
  EXPECT_LT((skew(v) + skew(v).transpose()).norm(), 1e-15);
  EXPECT_LT((vee(skew(v)) - v).norm(), 1e-15);
}

TEST(Spatial, ParallelAxisPointMass) {
  const Mat3 j = parallel_axis(Mat3::Zero(), 2.0, Vec3(0.0, 0.0, 0.5));
  EXPECT_NEAR(j(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(j(1, 1), 0.5, 1e-15);
  EXPECT_NEAR(j(2, 2), 0.0, 1e-15);
}

TEST(Spatial, ValidateInertiaRejectsBadTensors) {
  EXPECT_NO_THROW(validate_inertia(Vec3(1.0, 2.0, 2.5).asDiagonal()));
  Mat3 asym = Mat3::Identity();
  asym(0, 1) = 0.5;
  EXPECT_THROW(validate_inertia(asym), Error);
  EXPECT_THROW(validate_inertia(Vec3(1.0, -1.0, 1.0).asDiagonal()), Error);
  try {
    validate_inertia(Vec3(1.0, 1.0, 3.0).asDiagonal());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidInertia);
  }
}

TEST(Spatial, InertialParamsRejectsNonPositiveMass) {
  EXPECT_THROW(InertialParams(0.0, Vec3::Zero(), Mat3::Identity()), Error);
  EXPECT_THROW(InertialParams(-1.0, Vec3::Zero(), Mat3::Identity()), Error);
}

TEST(Spatial, TwoPointMassComposite) {
  const auto c = combine(1.0, Vec3(-0.5, 0, 0), Mat3::Zero(), 1.0, Vec3(0.5, 0, 0), Mat3::Zero());
  EXPECT_DOUBLE_EQ(c.mass, 2.0);
  EXPECT_LT(c.com.norm(), 1e-15);
  EXPECT_NEAR(c.inertia(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(c.inertia(1, 1), 0.5, 1e-15);
  EXPECT_NEAR(c.inertia(2, 2), 0.5, 1e-15);
}

TEST(Spatial, ComposeWithOffsetObject) {
  const InertialParams am(1.0, Vec3::Zero(), Mat3::Identity() * 0.01);
  const InertialParams obj(1.0, Vec3::Zero(), Mat3::Identity() * 0.001);
  const auto t = compose_inertia(am, obj, Vec3(0.0, 0.0, -0.2));
  EXPECT_NEAR(t.mass(), 2.0, 1e-15);
  EXPECT_NEAR(t.com().z(), -0.1, 1e-15);
  EXPECT_NEAR(t.inertia()(0, 0), 0.011 + 2 * 0.01, 1e-15);
  EXPECT_NEAR(t.inertia()(2, 2), 0.011, 1e-15);
}

// Twenty random vehicle-plus-payload configurations against a 2e5-point
// discretisation; agreement within 1% of the tensor norm.
TEST(Spatial, ComposeMatchesMonteCarlo) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> um(0.05, 2.0), ud(0.03, 0.4), up(-0.3, 0.3);
  for (int trial = 0; trial < 20; ++trial) {
    oracle::SolidBox a{um(rng), Vec3(up(rng), up(rng), up(rng)), Vec3(ud(rng), ud(rng), ud(rng)),
                       random_rotation(rng)};
    oracle::SolidBox b{um(rng), Vec3(up(rng), up(rng), up(rng)), Vec3(ud(rng), ud(rng), ud(rng)),
                       random_rotation(rng)};
    const auto mc = oracle::monte_carlo({a, b}, 200000, rng);

    const Mat3 ja = a.rotation * oracle::box_inertia(a.mass, a.dims) * a.rotation.transpose();
    const Mat3 jb = b.rotation * oracle::box_inertia(b.mass, b.dims) * b.rotation.transpose();
    const InertialParams pa(a.mass, a.center, ja);
    const InertialParams pb(b.mass, Vec3::Zero(), jb);
    const auto t = compose_inertia(pa, pb, b.center);

    EXPECT_NEAR(t.mass(), mc.mass, 1e-9);
    const double scale = std::sqrt(mc.inertia.trace() / mc.mass);
    EXPECT_LT((t.com() - mc.com).norm(), 0.01 * scale) << "trial " << trial;
    EXPECT_LT((t.inertia() - mc.inertia).norm(), 0.01 * mc.inertia.norm()) << "trial " << trial;
  }
}

TEST(Spatial, QuaternionMatrixRoundTrip) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const Mat3 r = random_rotation(rng);
    EXPECT_LT((to_matrix(from_matrix(r)) - r).norm(), 1e-12);
  }
}

TEST(Spatial, QuaternionDerivativeMatchesFiniteRotation) {
  const UnitQuaternion q(Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()));
  const Vec3 w(0.4, -1.3, 2.0);
  const double h = 1e-6;
  const UnitQuaternion q1 = q * UnitQuaternion(Eigen::AngleAxisd(w.norm() * h, w.normalized()));
  const Eigen::Vector4d fd((q1.w() - q.w()) / h, (q1.x() - q.x()) / h, (q1.y() - q.y()) / h,
                           (q1.z() - q.z()) / h);
  EXPECT_LT((quat_derivative(q, w) - fd).norm(), 1e-5);
}
