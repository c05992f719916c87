#include "varic/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "varic/error.hpp"
#include "varic/kernels.hpp"
#include "varic/rng.hpp"

namespace varic {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Eigen::VectorXd center_of(const ShapeSampler& s, int n) {
  if (s.center.size() == 0) return Eigen::VectorXd::Zero(n);
  if (s.center.size() != n) throw InvalidArgument("shape center has the wrong dimension");
  return s.center;
}

int ambient_dimension(const ShapeSampler& s) {
  switch (s.kind) {
    case ShapeKind::Torus: return 3;
    case ShapeKind::Plane:
      if (s.n < 3) throw InvalidArgument("plane patch needs n >= 3");
      return s.n;
    default:
      if (s.n < 2) throw InvalidArgument("shape needs n >= 2");
      return s.n;
  }
}

int shape_dimension(const ShapeSampler& s) {
  switch (s.kind) {
    case ShapeKind::Circle:
    case ShapeKind::Segment: return 1;
    case ShapeKind::Sphere: return s.n - 1;
    case ShapeKind::Torus:
    case ShapeKind::Plane: return 2;
  }
  return 1;
}

double total_measure(const ShapeSampler& s) {
  switch (s.kind) {
    case ShapeKind::Circle: return kTwoPi * s.radius;
    case ShapeKind::Sphere: return s.n * unit_ball_volume(s.n) * std::pow(s.radius, s.n - 1);
    case ShapeKind::Torus: return 4.0 * std::numbers::pi * std::numbers::pi * s.radius * s.minor_radius;
    case ShapeKind::Segment: return s.length;
    case ShapeKind::Plane: return s.length * s.length;
  }
  return 1.0;
}

Eigen::VectorXd sphere_normal(const Eigen::VectorXd& local) { return local.normalized(); }

// Torus angles (u around the axis, v around the tube) of a local point.
std::pair<double, double> torus_angles(const ShapeSampler& s, const Eigen::VectorXd& y) {
  const double rho = std::hypot(y[0], y[1]);
  return {std::atan2(y[1], y[0]), std::atan2(y[2], rho - s.radius)};
}

Eigen::Vector3d torus_normal(double u, double v) {
  return {std::cos(v) * std::cos(u), std::cos(v) * std::sin(u), std::sin(v)};
}

}  // namespace

ShapeKind parse_shape_kind(const std::string& name) {
  if (name == "circle") return ShapeKind::Circle;
  if (name == "sphere") return ShapeKind::Sphere;
  if (name == "torus") return ShapeKind::Torus;
  if (name == "segment") return ShapeKind::Segment;
  if (name == "plane") return ShapeKind::Plane;
  throw InvalidArgument("unknown shape '" + name + "' (circle, sphere, torus, segment, plane)");
}

std::string shape_name(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Circle: return "circle";
    case ShapeKind::Sphere: return "sphere";
    case ShapeKind::Torus: return "torus";
    case ShapeKind::Segment: return "segment";
    case ShapeKind::Plane: return "plane";
  }
  return "?";
}

PointCloudVarifold sample_shape(const ShapeSampler& s) {
  const int n = ambient_dimension(s);
  const int d = shape_dimension(s);
  if (s.count == 0) throw InvalidArgument("sample_shape: need at least one point");
  if (!(s.radius > 0.0) || !(s.minor_radius > 0.0) || !(s.length > 0.0)) {
    throw InvalidArgument("sample_shape: sizes must be positive");
  }
  if (s.kind == ShapeKind::Torus && !(s.minor_radius < s.radius)) {
    throw InvalidArgument("sample_shape: torus needs minor radius < major radius");
  }
  const Eigen::VectorXd c = center_of(s, n);
  SplitMix64 rng(s.seed);

  std::size_t count = s.count;
  std::size_t grid = 0;
  std::vector<std::pair<double, double>> torus_sites;
  if (s.kind == ShapeKind::Torus) {
    // Rings of constant v, each equispaced in u with a point count
    // proportional to its circumference; neighboring rings are staggered.
    const double h = std::sqrt(total_measure(s) / static_cast<double>(s.count));
    const auto rings = std::max<std::size_t>(3, static_cast<std::size_t>(std::lround(kTwoPi * s.minor_radius / h)));
    for (std::size_t j = 0; j < rings; ++j) {
      const double v_angle = kTwoPi * (static_cast<double>(j) + 0.5) / static_cast<double>(rings);
      const double circumference = kTwoPi * (s.radius + s.minor_radius * std::cos(v_angle));
      const auto m = std::max<std::size_t>(3, static_cast<std::size_t>(std::lround(circumference / h)));
      for (std::size_t k = 0; k < m; ++k) {
        const double u = s.phase + kTwoPi * (static_cast<double>(k) + 0.5 * static_cast<double>(j % 2)) /
                                       static_cast<double>(m);
        torus_sites.emplace_back(u, v_angle);
      }
    }
    count = torus_sites.size();
  }
  if (s.kind == ShapeKind::Plane) {
    grid = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(s.count)))));
    count = grid * grid;
  }
  PointCloudVarifold v(n, d, count);
  const double step = kTwoPi / static_cast<double>(count);

  for (std::size_t k = 0; k < count; ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd normal = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
    switch (s.kind) {
      case ShapeKind::Circle: {
        const double jitter = s.jitter > 0.0 ? s.jitter * (rng.uniform() - 0.5) : 0.0;
        const double theta = s.phase + step * (static_cast<double>(k) + jitter);
        normal[0] = std::cos(theta);
        normal[1] = std::sin(theta);
        x = s.radius * normal;
        P(0, 0) = normal[1] * normal[1];
        P(1, 1) = normal[0] * normal[0];
        P(0, 1) = P(1, 0) = -normal[0] * normal[1];
        break;
      }
      case ShapeKind::Sphere: {
        if (n == 2) {
          const double jitter = s.jitter > 0.0 ? s.jitter * (rng.uniform() - 0.5) : 0.0;
          const double theta = s.phase + step * (static_cast<double>(k) + jitter);
          normal << std::cos(theta), std::sin(theta);
        } else if (n == 3) {
          const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
          const double jitter = s.jitter > 0.0 ? s.jitter * (rng.uniform() - 0.5) : 0.0;
          const double z = 1.0 - 2.0 * (static_cast<double>(k) + 0.5 + jitter) / static_cast<double>(count);
          const double ring = std::sqrt(std::max(0.0, 1.0 - z * z));
          const double phi = s.phase + golden * static_cast<double>(k);
          normal << ring * std::cos(phi), ring * std::sin(phi), z;
        } else {
          for (int r = 0; r < n; ++r) normal[r] = rng.normal();
          normal.normalize();
        }
        x = s.radius * normal;
        P = Eigen::MatrixXd::Identity(n, n) - normal * normal.transpose();
        break;
      }
      case ShapeKind::Torus: {
        const auto [u, v_angle] = torus_sites[k];
        normal = torus_normal(u, v_angle);
        const double ring = s.radius + s.minor_radius * std::cos(v_angle);
        x << ring * std::cos(u), ring * std::sin(u), s.minor_radius * std::sin(v_angle);
        P = Eigen::MatrixXd::Identity(3, 3) - normal * normal.transpose();
        break;
      }
      case ShapeKind::Segment: {
        const double h = s.length / static_cast<double>(count > 1 ? count - 1 : 1);
        const double jitter = s.jitter > 0.0 ? s.jitter * (rng.uniform() - 0.5) : 0.0;
        x[0] = std::clamp(h * (static_cast<double>(k) + jitter), 0.0, s.length);
        normal[1] = 1.0;
        P(0, 0) = 1.0;
        break;
      }
      case ShapeKind::Plane: {
        const double h = s.length / static_cast<double>(grid > 1 ? grid - 1 : 1);
        const double jx = s.jitter > 0.0 ? s.jitter * (rng.uniform() - 0.5) : 0.0;
        const double jy = s.jitter > 0.0 ? s.jitter * (rng.uniform() - 0.5) : 0.0;
        x[0] = std::clamp(h * (static_cast<double>(k % grid) + jx), 0.0, s.length);
        x[1] = std::clamp(h * (static_cast<double>(k / grid) + jy), 0.0, s.length);
        normal[2] = 1.0;
        P(0, 0) = P(1, 1) = 1.0;
        break;
      }
    }
    if (s.noise > 0.0) x += s.noise * (2.0 * rng.uniform() - 1.0) * normal;
    v.points.col(col) = c + x;
    v.tangent(k) = 0.5 * (P + P.transpose());
  }
  v.masses = uniform_masses(count, total_measure(s));
  return v;
}

double distance_to_shape(const ShapeSampler& s, const Eigen::VectorXd& point) {
  const int n = ambient_dimension(s);
  if (point.size() != n) throw InvalidArgument("point has the wrong dimension for this shape");
  const Eigen::VectorXd y = point - center_of(s, n);
  switch (s.kind) {
    case ShapeKind::Circle: {
      const double rest = y.tail(n - 2).squaredNorm();
      const double radial = std::hypot(y[0], y[1]) - s.radius;
      return std::sqrt(radial * radial + rest);
    }
    case ShapeKind::Sphere: return std::abs(y.norm() - s.radius);
    case ShapeKind::Torus: {
      const double rho = std::hypot(y[0], y[1]);
      return std::abs(std::hypot(rho - s.radius, y[2]) - s.minor_radius);
    }
    case ShapeKind::Segment: {
      const double along = y[0] - std::clamp(y[0], 0.0, s.length);
      return std::sqrt(along * along + y.tail(n - 1).squaredNorm());
    }
    case ShapeKind::Plane: {
      const double ax = y[0] - std::clamp(y[0], 0.0, s.length);
      const double ay = y[1] - std::clamp(y[1], 0.0, s.length);
      return std::sqrt(ax * ax + ay * ay + y.tail(n - 2).squaredNorm());
    }
  }
  return 0.0;
}

Eigen::VectorXd analytic_mean_curvature(const ShapeSampler& s, const Eigen::VectorXd& point) {
  if (distance_to_shape(s, point) > 1e-8) throw InvalidArgument("analytic_mean_curvature: point is off the shape");
  const int n = ambient_dimension(s);
  const Eigen::VectorXd y = point - center_of(s, n);
  switch (s.kind) {
    case ShapeKind::Circle: {
      Eigen::VectorXd H = Eigen::VectorXd::Zero(n);
      H.head(2) = -y.head(2) / (s.radius * s.radius);
      return H;
    }
    case ShapeKind::Sphere: return -(static_cast<double>(n - 1) / (s.radius * s.radius)) * y;
    case ShapeKind::Torus: {
      const auto [u, v] = torus_angles(s, y);
      const double k = 1.0 / s.minor_radius + std::cos(v) / (s.radius + s.minor_radius * std::cos(v));
      return -k * Eigen::VectorXd(torus_normal(u, v));
    }
    case ShapeKind::Segment:
    case ShapeKind::Plane: return Eigen::VectorXd::Zero(n);
  }
  return Eigen::VectorXd::Zero(n);
}

Eigen::MatrixXd analytic_tangent(const ShapeSampler& s, const Eigen::VectorXd& point) {
  if (distance_to_shape(s, point) > 1e-8) throw InvalidArgument("analytic_tangent: point is off the shape");
  const int n = ambient_dimension(s);
  const Eigen::VectorXd y = point - center_of(s, n);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  switch (s.kind) {
    case ShapeKind::Circle: {
      Eigen::VectorXd t = Eigen::VectorXd::Zero(n);
      t[0] = -y[1];
      t[1] = y[0];
      t.normalize();
      P = t * t.transpose();
      break;
    }
    case ShapeKind::Sphere: {
      const Eigen::VectorXd nu = sphere_normal(y);
      P = Eigen::MatrixXd::Identity(n, n) - nu * nu.transpose();
      break;
    }
    case ShapeKind::Torus: {
      const auto [u, v] = torus_angles(s, y);
      const Eigen::VectorXd nu = torus_normal(u, v);
      P = Eigen::MatrixXd::Identity(3, 3) - nu * nu.transpose();
      break;
    }
    case ShapeKind::Segment: P(0, 0) = 1.0; break;
    case ShapeKind::Plane: P(0, 0) = P(1, 1) = 1.0; break;
  }
  return P;
}

}  // namespace varic
