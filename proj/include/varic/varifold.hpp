#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace varic {

struct ProjectorCheck {
  double symmetry = 0.0;     // max |P - P^T| entry
  double idempotence = 0.0;  // ||P^2 - P||_F
  double trace_error = 0.0;  // |trace(P) - d|
};

ProjectorCheck check_projector(const Eigen::Ref<const Eigen::MatrixXd>& P, int d);

/// True if P satisfies the projector invariants within `scale` times the
/// default tolerances (1e-12 symmetry, 1e-10 idempotence and trace).
bool is_projector(const Eigen::Ref<const Eigen::MatrixXd>& P, int d, double scale = 1.0);

/// Orthogonal projector onto the span of the columns of `basis` (n x d,
/// columns need not be orthonormal but must be independent).
Eigen::MatrixXd projector_onto(const Eigen::MatrixXd& basis);

/// A point-cloud d-varifold in R^n: sum_i m_i delta_{(x_i, P_i)}.
///
/// Positions are the columns of `points`; tangent projectors are stored as
/// consecutive column-major n x n blocks.
struct PointCloudVarifold {
  int n = 0;
  int d = 0;
  Eigen::MatrixXd points;  // n x N
  Eigen::VectorXd masses;  // N
  std::vector<double> tangents;

  PointCloudVarifold() = default;
  PointCloudVarifold(int n, int d, std::size_t count);

  std::size_t size() const { return static_cast<std::size_t>(points.cols()); }

  Eigen::Map<const Eigen::MatrixXd> tangent(std::size_t i) const {
    return {tangents.data() + i * n * n, n, n};
  }
  Eigen::Map<Eigen::MatrixXd> tangent(std::size_t i) { return {tangents.data() + i * n * n, n, n}; }
  const double* tangent_data(std::size_t i) const { return tangents.data() + i * n * n; }

  void set_all_tangents(const Eigen::MatrixXd& P);

  /// Throws InvalidArgument when a mass is non-positive or a tangent fails the
  /// projector invariants (tolerances multiplied by `projector_scale`).
  void validate(double projector_scale = 1.0) const;
};

/// N equal masses summing to `total`.
Eigen::VectorXd uniform_masses(std::size_t count, double total);

/// Mass-weighted local PCA: at each point, the projector onto the top-d
/// eigenvectors of sum_j m_j (x_j - x_i)(x_j - x_i)^T over neighbors with
/// 0 < |x_j - x_i| <= radius. Throws InvalidArgument listing every point
/// with fewer than d neighbors.
std::vector<double> estimate_tangents_pca(const Eigen::MatrixXd& points, const Eigen::VectorXd& masses,
                                          double radius, int d);

/// Same estimate in place; points with fewer than d neighbors keep their
/// current projector. Returns the number of such points. With `subset`,
/// only the listed points are refreshed.
std::size_t refresh_tangents_pca(const Eigen::MatrixXd& points, const Eigen::VectorXd& masses, double radius,
                                 int d, std::vector<double>& tangents,
                                 const std::vector<std::size_t>* subset = nullptr);

/// Inverse local density: m_i = omega_d eps^d / #{l : |x_l - x_i| <= eps},
/// the count including i itself. Used by the recompute mass policy.
Eigen::VectorXd density_masses(const Eigen::MatrixXd& points, double radius, int d);

}  // namespace varic
