#pragma once

#include <vector>

#include <Eigen/Dense>

namespace ami {

/// Position, velocity and acceleration of an n-dimensional reference.
struct TrajectorySample {
  Eigen::VectorXd pos;
  Eigen::VectorXd vel;
  Eigen::VectorXd acc;
};

struct Waypoint {
  double t;
  Eigen::VectorXd value;
  Eigen::VectorXd velocity;  // empty means at rest
};

/// Quintic segments between timed waypoints with the waypoint velocity and
/// zero acceleration at both ends; waypoints at rest give minimum-jerk
/// segments. Holds the first value before the first waypoint and the last
/// value after the final one.
class MinJerkTrajectory {
 public:
  MinJerkTrajectory() = default;
  /// Throws InvalidArgument unless times strictly increase and every value has
  /// the same dimension. The first and last waypoints must be at rest.
  explicit MinJerkTrajectory(std::vector<Waypoint> waypoints);

  TrajectorySample sample(double t) const;
  bool empty() const { return waypoints_.empty(); }
  int dimension() const;
  const std::vector<Waypoint>& waypoints() const { return waypoints_; }

 private:
  std::vector<Waypoint> waypoints_;
};

}  // namespace ami
