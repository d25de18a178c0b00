#include "ami/presense.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "ami/delta_arm.hpp"
#include "ami/error.hpp"

namespace ami {

bool OrientedBox::contains(const Vec3& p, double tol) const {
  const Vec3 local = rotation.transpose() * (p - center);
  return (local.cwiseAbs().array() <= (0.5 * dims).array() + tol).all();
}

void ObjectPrior::validate() const {
  if (!(beta > 0.0 && beta <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("prior '{}': beta must be in (0, 1]", label));
  }
  if (!((alpha.array() > 0.0).all() && (alpha.array() <= 3.0).all())) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("prior '{}': alpha entries must be in (0, 3]", label));
  }
  if (!(rho > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("prior '{}': rho must be positive", label));
  }
}

OrientedBox fit_obb(const PointCloud& cloud) {
  const auto& pts = cloud.points;
  if (pts.size() < 10) throw Error(ErrorCode::DegenerateCloud, "need at least 10 points");
  for (const auto& p : pts) {
    if (!p.allFinite()) throw Error(ErrorCode::DegenerateCloud, "non-finite point");
  }

  const double n = static_cast<double>(pts.size());
  const Vec3 mean = std::accumulate(pts.begin(), pts.end(), Vec3(Vec3::Zero())) / n;
  Mat3 cov = Mat3::Zero();
  for (const auto& p : pts) {
    const Vec3 d = p - mean;
    cov += d * d.transpose();
  }
  cov /= n;

  Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
  const Vec3 ev = es.eigenvalues();  // ascending
  if (ev(2) <= 0.0 || ev(0) <= 1e-10 * ev(2)) {
    throw Error(ErrorCode::DegenerateCloud, "covariance has rank < 3");
  }
  Mat3 axes = es.eigenvectors();

  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const auto& p : pts) {
    const Vec3 local = axes.transpose() * (p - mean);
    lo = lo.cwiseMin(local);
    hi = hi.cwiseMax(local);
  }
  const Vec3 extent = hi - lo;
  const Vec3 mid_local = 0.5 * (hi + lo);

  std::array<int, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int a, int b) { return extent(a) > extent(b); });

  OrientedBox box;
  box.center = mean + axes * mid_local;
  for (int k = 0; k < 3; ++k) {
    box.rotation.col(k) = axes.col(order[k]);
    box.dims(k) = extent(order[k]);
  }
  if (box.rotation.determinant() < 0.0) box.rotation.col(2) *= -1.0;
  return box;
}

ObjectEstimate estimate_inertia(const OrientedBox& box, const ObjectPrior& prior,
                                double pad_height) {
  prior.validate();
  if (!(box.dims.array() > 0.0).all()) {
    throw Error(ErrorCode::InvalidArgument, "box dimensions must be positive");
  }
  const double l = box.dims(0), w = box.dims(1), h = box.dims(2);

  ObjectEstimate est;
  est.volume_box = l * w * h;
  est.volume_hat = prior.beta * est.volume_box;
  est.mass_tilde = prior.rho * est.volume_hat;
  const Vec3 box_moments(w * w + h * h, l * l + h * h, l * l + w * w);
  est.moi_tilde = (est.mass_tilde / 12.0 * prior.alpha.cwiseProduct(box_moments)).asDiagonal();
  est.grasp_offset = Vec3(0.0, 0.0, -0.5 * h - pad_height);
  est.box_rotation = box.rotation;
  validate_inertia(est.moi_tilde);
  return est;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& s, const std::string& context) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::CatalogError, fmt::format("{}: '{}' is not a number", context, s));
  }
}

}  // namespace

PriorCatalog PriorCatalog::parse(std::istream& in) {
  PriorCatalog cat;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = split(t, ',');
    if (!header_seen) {
      const std::vector<std::string> expected{"label", "beta", "alpha_x", "alpha_y", "alpha_z",
                                              "rho"};
      if (fields != expected) {
        throw Error(ErrorCode::CatalogError,
                    "header must be label,beta,alpha_x,alpha_y,alpha_z,rho");
      }
      header_seen = true;
      continue;
    }
    const std::string ctx = fmt::format("catalog line {}", line_no);
    if (fields.size() != 6) throw Error(ErrorCode::CatalogError, ctx + ": expected 6 fields");
    ObjectPrior p;
    p.label = fields[0];
    if (p.label.empty()) throw Error(ErrorCode::CatalogError, ctx + ": empty label");
    p.beta = to_double(fields[1], ctx);
    p.alpha = Vec3(to_double(fields[2], ctx), to_double(fields[3], ctx), to_double(fields[4], ctx));
    p.rho = to_double(fields[5], ctx);
    try {
      p.validate();
    } catch (const Error& e) {
      throw Error(ErrorCode::CatalogError, ctx + ": " + e.what());
    }
    for (const auto& [existing, _] : cat.priors_) {
      if (lower(existing) == lower(p.label)) {
        throw Error(ErrorCode::CatalogError, ctx + ": duplicate label '" + p.label + "'");
      }
    }
    cat.priors_.emplace(p.label, p);
  }
  if (!header_seen) throw Error(ErrorCode::CatalogError, "catalog is empty");
  return cat;
}

PriorCatalog PriorCatalog::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::CatalogError, "cannot open catalog " + path);
  return parse(in);
}

const ObjectPrior& PriorCatalog::prior_for(const std::string& label) const {
  if (auto it = priors_.find(label); it != priors_.end()) return it->second;
  const std::string key = lower(label);
  for (const auto& [name, prior] : priors_) {
    if (lower(name) == key) return prior;
  }
  throw Error(ErrorCode::UnknownLabel, "no prior for '" + label + "'");
}

std::vector<std::string> PriorCatalog::labels() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : priors_) out.push_back(name);
  return out;
}

PointCloud parse_cloud(std::istream& in) {
  PointCloud cloud;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::replace(t.begin(), t.end(), ',', ' ');
    std::istringstream ss(t);
    Vec3 p;
    if (!(ss >> p.x() >> p.y() >> p.z())) {
      throw Error(ErrorCode::InvalidArgument, fmt::format("cloud line {}: expected x y z", line_no));
    }
    cloud.points.push_back(p);
  }
  return cloud;
}

PointCloud read_cloud(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open cloud " + path);
  return parse_cloud(in);
}

void write_cloud(std::ostream& out, const PointCloud& cloud) {
  for (const auto& p : cloud.points) out << fmt::format("{:.9g} {:.9g} {:.9g}\n", p.x(), p.y(), p.z());
}

namespace synth {

Mat3 solid_box_inertia(double mass, const Vec3& d) {
  return (mass / 12.0 *
          Vec3(d.y() * d.y() + d.z() * d.z(), d.x() * d.x() + d.z() * d.z(),
               d.x() * d.x() + d.y() * d.y()))
      .asDiagonal();
}

Mat3 solid_cylinder_inertia(double mass, double radius, double length) {
  const double axial = 0.5 * mass * radius * radius;
  const double transverse = mass * (3.0 * radius * radius + length * length) / 12.0;
  return Vec3(axial, transverse, transverse).asDiagonal();
}

PointCloud box_volume_cloud(const Vec3& dims, int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  PointCloud c;
  c.points.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double a = u(rng), b = u(rng), d = u(rng);
    c.points.emplace_back(a * dims.x(), b * dims.y(), d * dims.z());
  }
  return c;
}

PointCloud box_surface_cloud(const Vec3& dims, int n, std::mt19937_64& rng) {
  const std::array<double, 3> face_area{dims.y() * dims.z(), dims.x() * dims.z(),
                                        dims.x() * dims.y()};
  std::discrete_distribution<int> pick_axis(face_area.begin(), face_area.end());
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::bernoulli_distribution side(0.5);
  PointCloud c;
  c.points.reserve(n);
  for (int i = 0; i < n; ++i) {
    const int axis = pick_axis(rng);
    Vec3 local(u(rng), u(rng), u(rng));
    local(axis) = side(rng) ? 0.5 : -0.5;
    c.points.push_back(local.cwiseProduct(dims));
  }
  return c;
}

PointCloud cylinder_surface_cloud(double radius, double length, int n, std::mt19937_64& rng) {
  const double side_area = 2.0 * kPi * radius * length;
  const double cap_area = kPi * radius * radius;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  PointCloud c;
  c.points.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double pick = u01(rng) * (side_area + 2.0 * cap_area);
    const double phi = 2.0 * kPi * u01(rng);
    if (pick < side_area) {
      const double x = (u01(rng) - 0.5) * length;
      c.points.emplace_back(x, radius * std::cos(phi), radius * std::sin(phi));
    } else {
      const double r = radius * std::sqrt(u01(rng));
      const double x = pick < side_area + cap_area ? 0.5 * length : -0.5 * length;
      c.points.emplace_back(x, r * std::cos(phi), r * std::sin(phi));
    }
  }
  return c;
}

PointCloud transformed(const PointCloud& cloud, const Mat3& rotation, const Vec3& translation) {
  PointCloud out;
  out.points.reserve(cloud.points.size());
  for (const auto& p : cloud.points) out.points.push_back(rotation * p + translation);
  return out;
}

PointCloud with_noise(const PointCloud& cloud, double sigma, std::mt19937_64& rng) {
  if (sigma <= 0.0) return cloud;
  std::normal_distribution<double> nd(0.0, sigma);
  PointCloud out = cloud;
  for (auto& p : out.points) {
    const double a = nd(rng), b = nd(rng), d = nd(rng);
    p += Vec3(a, b, d);
  }
  return out;
}

}  // namespace synth

}  // namespace ami
