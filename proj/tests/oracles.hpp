#pragma once

// Reference computations written independently of the library, used as test
// oracles. Nothing here calls into ami except for plain types.

#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct SolidBox {
  double mass;
  Vec3 center;
  Vec3 dims;
  Mat3 rotation;  // box axes in the common frame
};

struct MassProps {
  double mass;
  Vec3 com;
  Mat3 inertia;  // about com
};

/// Point-mass discretisation: n uniform samples per box, each carrying
/// mass/n. Inertia is accumulated about the sample CoM.
inline MassProps monte_carlo(const std::vector<SolidBox>& boxes, int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::vector<std::pair<double, Vec3>> pts;
  pts.reserve(boxes.size() * static_cast<std::size_t>(n));
  for (const auto& b : boxes) {
    for (int i = 0; i < n; ++i) {
      const Vec3 local(u(rng) * b.dims.x(), u(rng) * b.dims.y(), u(rng) * b.dims.z());
      pts.emplace_back(b.mass / n, b.center + b.rotation * local);
    }
  }
  MassProps out{0.0, Vec3::Zero(), Mat3::Zero()};
  for (const auto& [m, p] : pts) {
    out.mass += m;
    out.com += m * p;
  }
  out.com /= out.mass;
  for (const auto& [m, p] : pts) {
    const Vec3 r = p - out.com;
    out.inertia += m * (r.squaredNorm() * Mat3::Identity() - r * r.transpose());
  }
  return out;
}

/// Solid box about its centre, box axes.
inline Mat3 box_inertia(double m, const Vec3& d) {
  Mat3 j = Mat3::Zero();
  j(0, 0) = m * (d.y() * d.y() + d.z() * d.z()) / 12.0;
  j(1, 1) = m * (d.x() * d.x() + d.z() * d.z()) / 12.0;
  j(2, 2) = m * (d.x() * d.x() + d.y() * d.y()) / 12.0;
  return j;
}

/// Phase margin of K / (s (tau s + 1)) in degrees, with its crossover.
inline std::pair<double, double> integrator_lag_pm(double k, double tau) {
  const double a = tau * tau;
  const double w2 = (-1.0 + std::sqrt(1.0 + 4.0 * k * k * a)) / (2.0 * a);
  const double w = std::sqrt(w2);
  return {90.0 - std::atan(tau * w) * 180.0 / M_PI, w};
}

/// Observer mass estimate for a payload step at t = 0, held hover, zero
/// acceleration: m_o (1 - exp(-c t / m_a)).
inline double dob_step_response(double m_o, double c, double m_a, double t) {
  return m_o * (1.0 - std::exp(-c * t / m_a));
}

/// Central differences of a vector function of three variables.
inline Mat3 fd_jacobian(const std::function<Vec3(const Vec3&)>& f, const Vec3& x, double h) {
  Mat3 j;
  for (int k = 0; k < 3; ++k) {
    Vec3 xp = x, xm = x;
    xp(k) += h;
    xm(k) -= h;
    j.col(k) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return j;
}

/// Complex polynomial evaluation with ascending coefficients, direct powers.
inline std::complex<double> poly(const std::vector<double>& c, std::complex<double> s) {
  std::complex<double> acc = 0.0, p = 1.0;
  for (double ci : c) {
    acc += ci * p;
    p *= s;
  }
  return acc;
}

}  // namespace oracle
