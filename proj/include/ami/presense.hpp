#pragma once

#include <iosfwd>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "ami/spatial.hpp"

namespace ami {

struct PointCloud {
  std::vector<Vec3> points;
};

/// Columns of rotation are the box axes (length, width, height) expressed in
/// the cloud frame; dims are sorted so dims(0) >= dims(1) >= dims(2).
struct OrientedBox {
  Vec3 center = Vec3::Zero();
  Mat3 rotation = Mat3::Identity();
  Vec3 dims = Vec3::Zero();

  double volume() const { return dims.prod(); }
  bool contains(const Vec3& p, double tol = 1e-9) const;
};

/// Shape and density prior for one object class.
struct ObjectPrior {
  std::string label;
  double beta = 1.0;              // volume fill of the bounding box, (0, 1]
  Vec3 alpha = Vec3::Ones();      // per-axis MoI correction, each in (0, 3]
  double rho = 1000.0;            // kg/m^3

  void validate() const;
};

struct ObjectEstimate {
  double mass_tilde;
  Mat3 moi_tilde;         // about the box centre, box axes
  double volume_box;      // l*w*h
  double volume_hat;      // beta * l*w*h
  Vec3 grasp_offset;      // end-effector origin to object CoM, frame E
  Mat3 box_rotation;      // box axes in the cloud frame

  /// Inertia re-expressed in the cloud frame axes.
  Mat3 moi_in_cloud_frame() const { return box_rotation * moi_tilde * box_rotation.transpose(); }
};

/// PCA oriented bounding box. Throws DegenerateCloud for fewer than 10 points,
/// non-finite points or a rank-deficient covariance.
OrientedBox fit_obb(const PointCloud& cloud);

/// Box volume scaled by beta, mass from the density, MoI from the box formula
/// scaled per axis by alpha. pad_height is the suction pad between the
/// end-effector plane and the object's top face.
ObjectEstimate estimate_inertia(const OrientedBox& box, const ObjectPrior& prior,
                                double pad_height = 0.01);

/// Read-only label -> prior table.
class PriorCatalog {
 public:
  /// CSV with header `label,beta,alpha_x,alpha_y,alpha_z,rho`. Blank lines and
  /// lines starting with '#' are skipped. Throws CatalogError on malformed
  /// rows or duplicate labels.
  static PriorCatalog parse(std::istream& in);
  static PriorCatalog load(const std::string& path);

  /// Exact match first, then case-insensitive. Throws UnknownLabel.
  const ObjectPrior& prior_for(const std::string& label) const;

  std::size_t size() const { return priors_.size(); }
  std::vector<std::string> labels() const;

 private:
  std::map<std::string, ObjectPrior> priors_;
};

/// Whitespace- or comma-separated xyz per line; '#' starts a comment line.
PointCloud read_cloud(const std::string& path);
PointCloud parse_cloud(std::istream& in);
void write_cloud(std::ostream& out, const PointCloud& cloud);

// Synthetic solids used for ground truth and for generating test clouds. The
// cylinder axis is x.
namespace synth {

Mat3 solid_box_inertia(double mass, const Vec3& dims);
Mat3 solid_cylinder_inertia(double mass, double radius, double length);

PointCloud box_volume_cloud(const Vec3& dims, int n, std::mt19937_64& rng);
PointCloud box_surface_cloud(const Vec3& dims, int n, std::mt19937_64& rng);
PointCloud cylinder_surface_cloud(double radius, double length, int n, std::mt19937_64& rng);

PointCloud transformed(const PointCloud& cloud, const Mat3& rotation, const Vec3& translation);
PointCloud with_noise(const PointCloud& cloud, double sigma, std::mt19937_64& rng);

}  // namespace synth

}  // namespace ami
