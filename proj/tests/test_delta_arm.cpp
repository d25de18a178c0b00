#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ami/delta_arm.hpp"
#include "ami/error.hpp"
#include "oracles.hpp"

using namespace ami;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no ami::Error thrown";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(DeltaArm, CentralPointGivesEqualAngles) {
  const DeltaGeometry g;
  const JointVec t = inverse_kin(g, Vec3(0.0, 0.0, -0.17));
  EXPECT_NEAR(t(0), t(1), 1e-12);
  EXPECT_NEAR(t(1), t(2), 1e-12);
  const Vec3 p = forward_kin(g, t);
  EXPECT_LT((p - Vec3(0.0, 0.0, -0.17)).norm(), 1e-12);
}

TEST(DeltaArm, ZeroAnglesHangBelowBase) {
  const Vec3 p = forward_kin(DeltaGeometry{}, JointVec::Zero());
  EXPECT_NEAR(p.x(), 0.0, 1e-12);
  EXPECT_NEAR(p.y(), 0.0, 1e-12);
  EXPECT_NEAR(p.z(), -std::sqrt(0.16 * 0.16 - 0.11 * 0.11), 1e-12);
}

TEST(DeltaArm, ShortForearmHasNoIntersection) {
  DeltaGeometry g;
  g.forearm_len = 0.02;
  EXPECT_EQ(code_of([&] { forward_kin(g, JointVec::Zero()); }), ErrorCode::NoIntersection);
}

TEST(DeltaArm, FarPointIsUnreachable) {
  EXPECT_EQ(code_of([] { inverse_kin(DeltaGeometry{}, Vec3(0.0, 0.0, -0.5)); }),
            ErrorCode::Unreachable);
}

TEST(DeltaArm, LimitViolationIsReported) {
  DeltaGeometry g;
  g.joint_max = {0.1, 0.1, 0.1};
  EXPECT_EQ(code_of([&] { inverse_kin(g, Vec3(0.0, 0.0, -0.21)); }), ErrorCode::OutOfLimits);
}

// 10 x 10 x 10 grid through the usable workspace.
TEST(DeltaArm, ForwardInverseRoundTripOnGrid) {
  const DeltaGeometry g;
  int n = 0;
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      for (int k = 0; k < 10; ++k) {
        const Vec3 p(-0.05 + 0.1 * i / 9.0, -0.05 + 0.1 * j / 9.0, -0.21 + 0.09 * k / 9.0);
        const Vec3 back = forward_kin(g, inverse_kin(g, p));
        EXPECT_LT((back - p).norm(), 1e-9) << p.transpose();
        ++n;
      }
    }
  }
  EXPECT_EQ(n, 1000);
}

TEST(DeltaArm, InverseForwardRoundTripRandom) {
  const DeltaGeometry g;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(deg2rad(-10.0), deg2rad(80.0));
  for (int i = 0; i < 500; ++i) {
    const JointVec t(u(rng), u(rng), u(rng));
    const JointVec back = inverse_kin(g, forward_kin(g, t));
    EXPECT_LT((back - t).norm(), 1e-9);
  }
}

TEST(DeltaArm, JacobianMatchesFiniteDifferences) {
  const DeltaGeometry g;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(deg2rad(-20.0), deg2rad(90.0));
  int tested = 0;
  while (tested < 300) {
    const JointVec t(u(rng), u(rng), u(rng));
    Mat3 j;
    try {
      j = jacobian(g, t);
    } catch (const Error&) {
      continue;
    }
    const Mat3 fd = oracle::fd_jacobian([&](const Vec3& x) { return forward_kin(g, x); }, t, 1e-6);
    EXPECT_LT((j - fd).norm() / fd.norm(), 1e-5);
    ++tested;
  }
}

TEST(DeltaArm, SymmetricJointRatesMoveVertically) {
  const DeltaGeometry g;
  const JointVec t = inverse_kin(g, Vec3(0.0, 0.0, -0.17));
  const Vec3 v = jacobian(g, t) * Vec3::Ones();
  EXPECT_LT(std::hypot(v.x(), v.y()), 1e-12 * std::abs(v.z()));
  EXPECT_LT(v.z(), 0.0);
}

TEST(DeltaArm, StretchedPoseIsSingular) {
  const DeltaGeometry g;
  const double t = std::acos(-(g.base_radius - g.platform_radius) /
                             (g.upper_arm_len + g.forearm_len));
  EXPECT_EQ(code_of([&] { jacobian(g, JointVec::Constant(t)); }), ErrorCode::Singular);
}

TEST(DeltaArm, JointCommandAtTargetIsZero) {
  const DeltaGeometry g;
  JointState cur;
  cur.theta = inverse_kin(g, Vec3(0.01, 0.02, -0.18));
  const auto cmd = joint_command(g, Vec3(0.01, 0.02, -0.18), Vec3::Zero(), cur, Vec3::Constant(20));
  EXPECT_LT(cmd.theta_dot_des.norm(), 1e-12);
}

TEST(DeltaArm, JointCommandProportionalTerm) {
  const DeltaGeometry g;
  JointState cur;
  cur.theta = inverse_kin(g, Vec3(0.0, 0.0, -0.17));
  cur.theta(1) -= 0.01;
  const auto cmd = joint_command(g, Vec3(0.0, 0.0, -0.17), Vec3::Zero(), cur, Vec3::Constant(20));
  EXPECT_NEAR(cmd.theta_dot_des(1), 0.2, 1e-9);
  EXPECT_NEAR(cmd.theta_dot_des(0), 0.0, 1e-9);
}

TEST(DeltaArm, VerticalFeedforwardIsSymmetric) {
  const DeltaGeometry g;
  JointState cur;
  cur.theta = inverse_kin(g, Vec3(0.0, 0.0, -0.17));
  const auto cmd = joint_command(g, Vec3(0.0, 0.0, -0.17), Vec3(0.0, 0.0, 0.1), cur,
                                 Vec3::Constant(20));
  EXPECT_NEAR(cmd.theta_dot_des(0), cmd.theta_dot_des(1), 1e-9);
  EXPECT_NEAR(cmd.theta_dot_des(1), cmd.theta_dot_des(2), 1e-9);
}

// Enlarging the forearm never removes a reachable grid point in the region
// from the default working depth downward. Closer to the base plane a longer
// forearm pushes the elbows past their lower limit, so the property fails there.
TEST(DeltaArm, ReachableSetMonotoneInForearm) {
  DeltaGeometry shorter, longer;
  longer.forearm_len = shorter.forearm_len * 1.1;
  auto reachable = [](const DeltaGeometry& g, const Vec3& p) {
    try {
      inverse_kin(g, p);
      return true;
    } catch (const Error&) {
      return false;
    }
  };
  int reached = 0;
  for (int i = 0; i < 21; ++i) {
    for (int j = 0; j < 21; ++j) {
      for (int k = 0; k < 21; ++k) {
        const Vec3 p(-0.08 + 0.16 * i / 20.0, -0.08 + 0.16 * j / 20.0, -0.15 - 0.12 * k / 20.0);
        if (reachable(shorter, p)) {
          ++reached;
          EXPECT_TRUE(reachable(longer, p)) << p.transpose();
        }
      }
    }
  }
  EXPECT_GT(reached, 100);
}

TEST(DeltaArm, ServoRespectsRateAndJointLimits) {
  const DeltaGeometry g;
  const ServoModel servo{6.0};
  JointState s;
  const auto out = servo.step(g, s, JointVec(100.0, -100.0, 1.0), 0.01);
  EXPECT_NEAR(out.theta(0), 0.06, 1e-15);
  EXPECT_NEAR(out.theta(1), -0.06, 1e-15);
  EXPECT_NEAR(out.theta(2), 0.01, 1e-15);
  s.theta = JointVec::Constant(g.joint_max[0] - 0.001);
  const auto top = servo.step(g, s, JointVec::Constant(6.0), 0.01);
  EXPECT_DOUBLE_EQ(top.theta(0), g.joint_max[0]);
}
