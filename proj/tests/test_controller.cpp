#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ami/controller.hpp"
#include "ami/delta_arm.hpp"
#include "ami/error.hpp"

using namespace ami;

TEST(Controller, HoverAtSetpoint) {
  Gains g;
  const auto cmd = position_loop(PositionSetpoint{Vec3(0, 0, 1)}, Vec3(0, 0, 1), Vec3::Zero(),
                                 UnitQuaternion::Identity(), 1.6, g, Vec3::Zero(), 9.81, 70.0);
  EXPECT_NEAR(cmd.thrust_des, 1.6 * 9.81, 1e-12);
  EXPECT_LT(cmd.q_des.angularDistance(UnitQuaternion::Identity()), 1e-12);
  EXPECT_FALSE(cmd.free_fall);
}

TEST(Controller, ThrustLinearInMass) {
  Gains g;
  const PositionSetpoint sp{Vec3(0, 0, 1.2)};
  const auto a = position_loop(sp, Vec3(0, 0, 1), Vec3::Zero(), UnitQuaternion::Identity(), 1.0,
                               g, Vec3::Zero(), 9.81, 70.0);
  const auto b = position_loop(sp, Vec3(0, 0, 1), Vec3::Zero(), UnitQuaternion::Identity(), 2.0,
                               g, Vec3::Zero(), 9.81, 70.0);
  EXPECT_NEAR(b.thrust_des, 2.0 * a.thrust_des, 1e-12);
}

TEST(Controller, PositionGainOnXError) {
  Gains g;
  const auto cmd = position_loop(PositionSetpoint{Vec3(1, 0, 0)}, Vec3::Zero(), Vec3::Zero(),
                                 UnitQuaternion::Identity(), 1.0, g, Vec3::Zero(), 9.81, 70.0);
  EXPECT_NEAR(cmd.a_cmd.x(), 4.0, 1e-12);
  EXPECT_NEAR(cmd.a_cmd.z(), 9.81, 1e-12);
}

TEST(Controller, ThrustIsClamped) {
  Gains g;
  const auto cmd = position_loop(PositionSetpoint{Vec3(0, 0, 100)}, Vec3::Zero(), Vec3::Zero(),
                                 UnitQuaternion::Identity(), 1.5, g, Vec3::Zero(), 9.81, 20.0);
  EXPECT_DOUBLE_EQ(cmd.thrust_des, 20.0);
}

TEST(Controller, FreeFallFallsBackToGivenAttitude) {
  Gains g;
  const UnitQuaternion fb(Eigen::AngleAxisd(0.2, Vec3::UnitZ()));
  const auto cmd = position_loop(PositionSetpoint{Vec3::Zero()}, Vec3::Zero(), Vec3::Zero(),
                                 UnitQuaternion::Identity(), 1.0, g, Vec3::Zero(), 9.81, 70.0,
                                 Vec3(0, 0, -9.81), fb);
  EXPECT_TRUE(cmd.free_fall);
  EXPECT_LT(cmd.q_des.angularDistance(fb), 1e-12);
}

TEST(Controller, AttitudeZeroAtTarget) {
  const UnitQuaternion q(Eigen::AngleAxisd(0.5, Vec3(1, 1, 0).normalized()));
  EXPECT_LT(attitude_loop(q, q, Vec3(6, 6, 3)).norm(), 1e-15);
}

TEST(Controller, AttitudeErrorSmallAngle) {
  const Vec3 axis = Vec3(0.3, -0.5, 0.8).normalized();
  const double a = deg2rad(5.0);
  const UnitQuaternion q(Eigen::AngleAxisd(a, axis));
  const Vec3 e = attitude_error(UnitQuaternion::Identity(), q);
  EXPECT_LT((e - a * axis).norm(), 0.01 * a);
  const Vec3 w = attitude_loop(UnitQuaternion::Identity(), q, Vec3(6, 6, 3));
  EXPECT_NEAR(w.z(), -3.0 * e.z(), 1e-15);
}

TEST(Controller, AttitudeAntipodalIsFinite) {
  const UnitQuaternion q(Eigen::AngleAxisd(kPi, Vec3::UnitZ()));
  const Vec3 e = attitude_error(UnitQuaternion::Identity(), q);
  EXPECT_TRUE(e.allFinite());
  EXPECT_NEAR(e.norm(), 2.0, 1e-12);
  // Same rotation written with the opposite sign gives the same error.
  const UnitQuaternion qn(-q.w(), -q.x(), -q.y(), -q.z());
  EXPECT_LT((attitude_error(UnitQuaternion::Identity(), qn) - e).norm(), 1e-12);
}

TEST(Controller, IagsGain) {
  const Mat3 ja = Vec3(9.2e-3, 10.5e-3, 14.7e-3).asDiagonal();
  EXPECT_LT((iags_gain(ja, ja) - Mat3::Identity()).norm(), 1e-15);
  EXPECT_LT((iags_gain(ja, 2.0 * ja) - 2.0 * Mat3::Identity()).norm(), 1e-14);
}

TEST(Controller, RateLoopZeroError) {
  RateController rc;
  Gains g;
  EXPECT_LT(rc.step(Vec3::Zero(), Vec3::Zero(), g, Vec3::Ones(), 0.0025).norm(), 1e-15);
}

TEST(Controller, RateLoopProportionalScaledByKk) {
  RateController rc;
  Gains g;
  g.k_i_rate.setZero();
  g.k_d_rate.setZero();
  const Vec3 e(0.5, -0.2, 0.1), kk(2.0, 3.0, 1.5);
  const Vec3 tau = rc.step(e, Vec3::Zero(), g, kk, 0.0025);
  EXPECT_LT((tau - g.k_p_rate.cwiseProduct(e).cwiseProduct(kk)).norm(), 1e-15);
}

TEST(Controller, RateIntegralIsClamped) {
  RateController rc;
  Gains g;
  for (int i = 0; i < 10000; ++i) rc.step(Vec3(5, -5, 5), Vec3::Zero(), g, Vec3::Ones(), 0.0025);
  EXPECT_LE(rc.integral().cwiseAbs().maxCoeff(), g.i_limit + 1e-15);
}

// Single-axis rate loop with motor lag; the loaded plant with K_k = J_t / J_a
// must reproduce the unloaded step response.
TEST(Controller, ScheduledGainRestoresUnloadedResponse) {
  auto simulate = [](double j_scale, double kk) {
    const double ja = 10.5e-3, j = ja * j_scale, tau_m = 0.02, dt = 0.0005;
    Gains g;
    RateController rc;
    double w = 0.0, tau_act = 0.0, tau_cmd = 0.0;
    std::vector<double> trace;
    for (int k = 0; k < 2000; ++k) {
      if (k % 5 == 0) {
        tau_cmd = rc.step(Vec3(0, 1.0, 0), Vec3(0, w, 0), g, Vec3(1, kk, 1), 0.0025).y();
      }
      tau_act = tau_cmd + (tau_act - tau_cmd) * std::exp(-dt / tau_m);
      w += dt * tau_act / j;
      trace.push_back(w);
    }
    return trace;
  };
  const auto nominal = simulate(1.0, 1.0);
  for (double s : {1.5, 2.5, 3.79}) {
    const auto loaded = simulate(s, s);
    const auto unscheduled = simulate(s, 1.0);
    double err = 0.0, err_u = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < nominal.size(); ++i) {
      err += std::pow(loaded[i] - nominal[i], 2);
      err_u += std::pow(unscheduled[i] - nominal[i], 2);
      ref += nominal[i] * nominal[i];
    }
    EXPECT_LT(std::sqrt(err / ref), 0.01) << "scale " << s;
    EXPECT_GT(std::sqrt(err_u / ref), 0.01) << "scale " << s;
  }
}

TEST(Controller, MixerPureCollective) {
  const auto m = mixer(16.0, Vec3::Zero(), RotorConfig{});
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(m.thrusts(i), 4.0, 1e-12);
  EXPECT_FALSE(m.saturated);
}

TEST(Controller, MixerPureRoll) {
  RotorConfig cfg;
  const auto m = mixer(16.0, Vec3(0.1, 0, 0), cfg);
  const RotorVec d = m.thrusts - RotorVec::Constant(4.0);
  EXPECT_NEAR(d.sum(), 0.0, 1e-12);
  EXPECT_NEAR(d(0), d(1), 1e-12);
  EXPECT_NEAR(d(0), -d(2), 1e-12);
  EXPECT_GT(d(0), 0.0);
}

TEST(Controller, MixerRoundTrip) {
  RotorConfig cfg;
  const Eigen::Matrix4d a = allocation_matrix(cfg);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ut(8.0, 40.0), um(-0.2, 0.2), uy(-0.05, 0.05);
  for (int i = 0; i < 200; ++i) {
    const double t = ut(rng);
    const Vec3 tau(um(rng), um(rng), uy(rng));
    const auto m = mixer(t, tau, cfg);
    ASSERT_FALSE(m.saturated);
    const Eigen::Vector4d w = a * m.thrusts;
    EXPECT_LT((w - Eigen::Vector4d(t, tau.x(), tau.y(), tau.z())).norm(), 1e-9);
  }
}

TEST(Controller, MixerSaturationKeepsTorque) {
  RotorConfig cfg;
  const auto m = mixer(4.0 * cfg.max_thrust(), Vec3(0.3, 0, 0), cfg);
  EXPECT_TRUE(m.saturated);
  EXPECT_FALSE(m.infeasible);
  EXPECT_LE(m.thrusts.maxCoeff(), cfg.max_thrust() + 1e-12);
  EXPECT_GE(m.thrusts.minCoeff(), -1e-12);
  const Eigen::Vector4d w = allocation_matrix(cfg) * m.thrusts;
  EXPECT_NEAR(w(1), 0.3, 1e-9);
}

TEST(Controller, GainValidation) {
  Gains g;
  EXPECT_NO_THROW(g.validate());
  g.k_pos.x() = -1.0;
  EXPECT_THROW(g.validate(), Error);
}
