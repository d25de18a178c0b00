#include "ami/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ami/error.hpp"

namespace ami {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidInertia: return "InvalidInertia";
    case ErrorCode::NoIntersection: return "NoIntersection";
    case ErrorCode::Unreachable: return "Unreachable";
    case ErrorCode::OutOfLimits: return "OutOfLimits";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DegenerateCloud: return "DegenerateCloud";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::CatalogError: return "CatalogError";
    case ErrorCode::PoleOnAxis: return "PoleOnAxis";
    case ErrorCode::NoCrossover: return "NoCrossover";
    case ErrorCode::NeverConverged: return "NeverConverged";
    case ErrorCode::MismatchedRuns: return "MismatchedRuns";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return s;
}

Vec3 vee(const Mat3& m) {
  return 0.5 * Vec3(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
}

Mat3 parallel_axis(const Mat3& j_com, double mass, const Vec3& d) {
  if (mass < 0.0) throw Error(ErrorCode::InvalidArgument, "parallel_axis: negative mass");
  return j_com + mass * (d.dot(d) * Mat3::Identity() - d * d.transpose());
}

void validate_inertia(const Mat3& j) {
  if (!j.allFinite()) throw Error(ErrorCode::InvalidInertia, "non-finite entries");
  const double scale = std::max(j.cwiseAbs().maxCoeff(), 1e-300);
  if ((j - j.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw Error(ErrorCode::InvalidInertia, "tensor is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(0.5 * (j + j.transpose()), Eigen::EigenvaluesOnly);
  const Vec3 ev = es.eigenvalues();
  if (ev.minCoeff() <= 0.0) {
    std::ostringstream os;
    os << "tensor is not positive definite (min eigenvalue " << ev.minCoeff() << ")";
    throw Error(ErrorCode::InvalidInertia, os.str());
  }
  const double slack = 1e-9 * ev.sum();
  if (ev(0) + ev(1) < ev(2) - slack) {
    throw Error(ErrorCode::InvalidInertia, "principal moments violate the triangle inequality");
  }
}

InertialParams::InertialParams(double mass, const Vec3& com, const Mat3& inertia_about_com)
    : mass_(mass), com_(com), inertia_(inertia_about_com) {
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw Error(ErrorCode::InvalidInertia, "mass must be positive and finite");
  }
  if (!com.allFinite()) throw Error(ErrorCode::InvalidInertia, "non-finite centre of mass");
  validate_inertia(inertia_about_com);
}

InertialParams InertialParams::translated(const Vec3& offset) const {
  return InertialParams(mass_, com_ + offset, inertia_);
}

CompositeResult combine(double mass_a, const Vec3& com_a, const Mat3& j_a,
                        double mass_b, const Vec3& com_b, const Mat3& j_b) {
  const double m = mass_a + mass_b;
  if (!(m > 0.0)) throw Error(ErrorCode::InvalidArgument, "combine: total mass must be positive");
  const Vec3 c = (mass_a * com_a + mass_b * com_b) / m;
  const Vec3 d_a = c - com_a;
  const Vec3 d_b = c - com_b;
  Mat3 j = parallel_axis(j_a, mass_a, d_a) + parallel_axis(j_b, mass_b, d_b);
  j = 0.5 * (j + j.transpose());
  return {m, c, j};
}

InertialParams combine(const InertialParams& a, const InertialParams& b) {
  const auto r = combine(a.mass(), a.com(), a.inertia(), b.mass(), b.com(), b.inertia());
  return InertialParams(r.mass, r.com, r.inertia);
}

InertialParams compose_inertia(const InertialParams& am, const InertialParams& obj,
                               const Vec3& p_obj) {
  return combine(am, obj.translated(p_obj));
}

Mat3 to_matrix(const UnitQuaternion& q) { return q.normalized().toRotationMatrix(); }

UnitQuaternion from_matrix(const Mat3& r) {
  UnitQuaternion q(r);
  q.normalize();
  if (q.w() < 0.0) q.coeffs() *= -1.0;
  return q;
}

Eigen::Vector4d quat_derivative(const UnitQuaternion& q, const Vec3& w) {
  // Layout (w, x, y, z).
  Eigen::Vector4d d;
  d(0) = -0.5 * (q.x() * w.x() + q.y() * w.y() + q.z() * w.z());
  d(1) = 0.5 * (q.w() * w.x() + q.y() * w.z() - q.z() * w.y());
  d(2) = 0.5 * (q.w() * w.y() + q.z() * w.x() - q.x() * w.z());
  d(3) = 0.5 * (q.w() * w.z() + q.x() * w.y() - q.y() * w.x());
  return d;
}

}  // namespace ami
