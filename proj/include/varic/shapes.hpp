#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "varic/varifold.hpp"

namespace varic {

enum class ShapeKind { Circle, Sphere, Torus, Segment, Plane };

ShapeKind parse_shape_kind(const std::string& name);
std::string shape_name(ShapeKind kind);

/// Test fixtures with exact tangents and uniform masses (total mass equal to
/// the shape's length/area when known, 1 otherwise).
///
///  - Circle: R, center, in the x1-x2 plane of R^n (d = 1). Angles
///    phase + 2 pi (k + jitter (u_k - 1/2)) / N.
///  - Sphere: R, center, the (n-1)-sphere in R^n. n = 2 is the circle,
///    n = 3 a Fibonacci lattice rotated by `phase` about the z axis; other n
///    use normalized Gaussian samples.
///  - Torus: major R (`radius`), minor r (`minor_radius`) in R^3, on rings
///    of constant tube angle with about N points in total, each ring
///    equispaced with a count proportional to its circumference.
///  - Segment: [0, length] e_1 in R^n, equally spaced (plus jitter).
///  - Plane: the square [0, length]^2 in the x1-x2 plane of R^n on an
///    m x m grid, m = round(sqrt(N)); the cloud has m^2 points.
///
/// `noise` displaces every point along a unit normal by a uniform amount in
/// [-noise, noise]; tangents stay those of the unperturbed shape.
struct ShapeSampler {
  ShapeKind kind = ShapeKind::Circle;
  int n = 2;
  std::size_t count = 100;
  double radius = 1.0;
  double minor_radius = 0.5;
  double length = 1.0;
  Eigen::VectorXd center;  // empty means the origin
  double noise = 0.0;
  double jitter = 0.0;
  double phase = 0.0;
  std::uint64_t seed = 0;
};

PointCloudVarifold sample_shape(const ShapeSampler& sampler);

/// Distance from `point` to the unperturbed shape.
double distance_to_shape(const ShapeSampler& shape, const Eigen::VectorXd& point);

/// Mean curvature vector of the smooth shape at `point` (inward, |H| = d/R
/// for spheres). Throws InvalidArgument when the point is more than 1e-8 off
/// the shape.
Eigen::VectorXd analytic_mean_curvature(const ShapeSampler& shape, const Eigen::VectorXd& point);

/// Tangent projector of the smooth shape at `point` (same precondition).
Eigen::MatrixXd analytic_tangent(const ShapeSampler& shape, const Eigen::VectorXd& point);

}  // namespace varic
