#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace ami {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using UnitQuaternion = Eigen::Quaterniond;

/// Cross-product matrix: skew(v) * w == v.cross(w).
Mat3 skew(const Vec3& v);

/// Inverse of skew() for antisymmetric input; uses the antisymmetric part.
Vec3 vee(const Mat3& m);

/// Shifts an inertia tensor from a body's CoM to a point offset by d:
/// j_com + mass * ((d.d) I - d d^T).
Mat3 parallel_axis(const Mat3& j_com, double mass, const Vec3& d);

/// Throws Error(InvalidInertia) unless j is symmetric positive definite and its
/// principal moments satisfy the triangle inequality.
void validate_inertia(const Mat3& j);

/// Mass, centre of mass and inertia about that centre of mass. Always valid
/// once constructed.
class InertialParams {
 public:
  InertialParams(double mass, const Vec3& com, const Mat3& inertia_about_com);

  double mass() const { return mass_; }
  const Vec3& com() const { return com_; }
  const Mat3& inertia() const { return inertia_; }

  /// Same body, CoM translated by offset.
  InertialParams translated(const Vec3& offset) const;

 private:
  double mass_;
  Vec3 com_;
  Mat3 inertia_;
};

/// Raw composite of two bodies whose CoMs are given in the same frame. Either
/// inertia may be PSD (point masses); the mass sum must be positive.
struct CompositeResult {
  double mass;
  Vec3 com;
  Mat3 inertia;
};
CompositeResult combine(double mass_a, const Vec3& com_a, const Mat3& j_a,
                        double mass_b, const Vec3& com_b, const Mat3& j_b);

/// Composite of two validated bodies with CoMs in the same frame.
InertialParams combine(const InertialParams& a, const InertialParams& b);

/// Vehicle plus object whose own CoM sits at p_obj + obj.com() in the vehicle
/// frame. Total CoM is the mass-weighted mean; inertia uses the parallel-axis
/// shift of each part to that CoM.
InertialParams compose_inertia(const InertialParams& am, const InertialParams& obj,
                               const Vec3& p_obj);

Mat3 to_matrix(const UnitQuaternion& q);
UnitQuaternion from_matrix(const Mat3& r);

/// q_dot for body-frame angular rate omega: 0.5 * q (x) [0, omega].
Eigen::Vector4d quat_derivative(const UnitQuaternion& q, const Vec3& omega_body);

/// Diagonal entries as a vector (principal-axis view of a diagonal tensor).
inline Vec3 diag_of(const Mat3& m) { return m.diagonal(); }

inline bool all_finite(const Vec3& v) { return v.allFinite(); }

}  // namespace ami
