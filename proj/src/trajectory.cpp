#include "ami/trajectory.hpp"

#include <algorithm>
#include <cmath>

#include "ami/error.hpp"

namespace ami {

MinJerkTrajectory::MinJerkTrajectory(std::vector<Waypoint> waypoints)
    : waypoints_(std::move(waypoints)) {
  for (std::size_t i = 0; i < waypoints_.size(); ++i) {
    if (!std::isfinite(waypoints_[i].t) || !waypoints_[i].value.allFinite()) {
      throw Error(ErrorCode::InvalidArgument, "waypoint is not finite");
    }
    Waypoint& w = waypoints_[i];
    if (w.value.size() != waypoints_[0].value.size()) {
      throw Error(ErrorCode::InvalidArgument, "waypoints differ in dimension");
    }
    if (w.velocity.size() == 0) w.velocity = Eigen::VectorXd::Zero(w.value.size());
    if (w.velocity.size() != w.value.size() || !w.velocity.allFinite()) {
      throw Error(ErrorCode::InvalidArgument, "waypoint velocity has the wrong dimension");
    }
    if ((i == 0 || i + 1 == waypoints_.size()) && !w.velocity.isZero(0.0)) {
      throw Error(ErrorCode::InvalidArgument, "end waypoints must be at rest");
    }
    if (i > 0 && !(waypoints_[i].t > waypoints_[i - 1].t)) {
      throw Error(ErrorCode::InvalidArgument, "waypoint times must strictly increase");
    }
  }
}

int MinJerkTrajectory::dimension() const {
  return waypoints_.empty() ? 0 : static_cast<int>(waypoints_[0].value.size());
}

TrajectorySample MinJerkTrajectory::sample(double t) const {
  if (waypoints_.empty()) throw Error(ErrorCode::InvalidArgument, "empty trajectory");
  const int n = dimension();
  TrajectorySample out{waypoints_.front().value, Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
  if (t <= waypoints_.front().t) return out;
  if (t >= waypoints_.back().t) {
    out.pos = waypoints_.back().value;
    return out;
  }
  const auto it = std::upper_bound(waypoints_.begin(), waypoints_.end(), t,
                                   [](double x, const Waypoint& w) { return x < w.t; });
  const Waypoint& b = *it;
  const Waypoint& a = *(it - 1);
  const double T = b.t - a.t;
  const double s = (t - a.t) / T;
  const Eigen::VectorXd d = b.value - a.value;
  const Eigen::VectorXd v0 = a.velocity * T;
  const Eigen::VectorXd v1 = b.velocity * T;
  const Eigen::VectorXd c3 = 10.0 * d - 6.0 * v0 - 4.0 * v1;
  const Eigen::VectorXd c4 = -15.0 * d + 8.0 * v0 + 7.0 * v1;
  const Eigen::VectorXd c5 = 6.0 * d - 3.0 * v0 - 3.0 * v1;
  const double s2 = s * s;
  const double s3 = s2 * s;
  out.pos = a.value + s * v0 + s3 * c3 + s3 * s * c4 + s3 * s2 * c5;
  out.vel = (v0 + 3.0 * s2 * c3 + 4.0 * s3 * c4 + 5.0 * s3 * s * c5) / T;
  out.acc = (6.0 * s * c3 + 12.0 * s2 * c4 + 20.0 * s3 * c5) / (T * T);
  return out;
}

}  // namespace ami
