#include "varic/varifold.hpp"

#include <algorithm>
#include <cmath>

#include "varic/error.hpp"
#include "varic/kernels.hpp"
#include "varic/neighbors.hpp"
#include "varic/parallel.hpp"

namespace varic {

ProjectorCheck check_projector(const Eigen::Ref<const Eigen::MatrixXd>& P, int d) {
  ProjectorCheck out;
  out.symmetry = (P - P.transpose()).cwiseAbs().maxCoeff();
  out.idempotence = (P * P - P).norm();
  out.trace_error = std::abs(P.trace() - d);
  return out;
}

bool is_projector(const Eigen::Ref<const Eigen::MatrixXd>& P, int d, double scale) {
  if (P.rows() != P.cols() || !P.allFinite()) return false;
  const auto c = check_projector(P, d);
  return c.symmetry <= 1e-12 * scale && c.idempotence <= 1e-10 * scale && c.trace_error <= 1e-10 * scale;
}

Eigen::MatrixXd projector_onto(const Eigen::MatrixXd& basis) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
  const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(basis.rows(), basis.cols());
  Eigen::MatrixXd P = Q * Q.transpose();
  return 0.5 * (P + P.transpose());
}

PointCloudVarifold::PointCloudVarifold(int n_, int d_, std::size_t count)
    : n(n_), d(d_), points(Eigen::MatrixXd::Zero(n_, static_cast<Eigen::Index>(count))),
      masses(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(count), count ? 1.0 / count : 1.0)),
      tangents(count * n_ * n_, 0.0) {
  if (n_ < 2 || d_ < 1 || d_ >= n_) throw InvalidArgument("varifold: need 1 <= d < n");
}

void PointCloudVarifold::set_all_tangents(const Eigen::MatrixXd& P) {
  for (std::size_t i = 0; i < size(); ++i) tangent(i) = P;
}

void PointCloudVarifold::validate(double projector_scale) const {
  if (n < 2 || d < 1 || d >= n) throw InvalidArgument("varifold: need 1 <= d < n");
  if (points.rows() != n) throw InvalidArgument("varifold: point dimension mismatch");
  if (static_cast<std::size_t>(masses.size()) != size() || tangents.size() != size() * n * n) {
    throw InvalidArgument("varifold: masses/tangents do not match the point count");
  }
  if (!points.allFinite()) throw InvalidArgument("varifold: non-finite coordinates");
  for (std::size_t i = 0; i < size(); ++i) {
    if (!(masses[static_cast<Eigen::Index>(i)] > 0.0)) {
      throw InvalidArgument("varifold: mass of point " + std::to_string(i) + " is not positive");
    }
    if (!is_projector(tangent(i), d, projector_scale)) {
      throw InvalidArgument("varifold: tangent of point " + std::to_string(i) + " is not a rank-" +
                            std::to_string(d) + " projector");
    }
  }
}

Eigen::VectorXd uniform_masses(std::size_t count, double total) {
  if (count == 0) throw InvalidArgument("uniform_masses: need at least one point");
  if (!(total > 0.0)) throw InvalidArgument("uniform_masses: total must be positive");
  return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(count), total / count);
}

namespace {

// Projector onto the top-d eigenvectors of the local second-moment matrix;
// false when point i has fewer than d neighbors.
bool local_pca(const SpatialIndex& index, const Eigen::MatrixXd& points, const Eigen::VectorXd& masses,
               double radius, int d, std::size_t i, double* out) {
  const int n = static_cast<int>(points.rows());
  const auto neighbors = index.query_radius(i, radius);
  if (neighbors.size() < static_cast<std::size_t>(d)) return false;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t j : neighbors) {
    const Eigen::VectorXd u = points.col(static_cast<Eigen::Index>(j)) - points.col(static_cast<Eigen::Index>(i));
    M.noalias() += masses[static_cast<Eigen::Index>(j)] * u * u.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M);
  // Eigenvalues ascend; the top d are the last columns.
  const Eigen::MatrixXd V = eig.eigenvectors().rightCols(d);
  Eigen::Map<Eigen::MatrixXd> P(out, n, n);
  P.noalias() = V * V.transpose();
  P = 0.5 * (P + P.transpose()).eval();
  return true;
}

}  // namespace

std::vector<double> estimate_tangents_pca(const Eigen::MatrixXd& points, const Eigen::VectorXd& masses,
                                          double radius, int d) {
  if (!(radius > 0.0)) throw InvalidArgument("estimate_tangents_pca: radius must be positive");
  const int n = static_cast<int>(points.rows());
  const std::size_t count = static_cast<std::size_t>(points.cols());
  const SpatialIndex index(points, radius);
  std::vector<double> tangents(count * n * n, 0.0);
  std::vector<char> ok(count, 0);
  parallel_for(count, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      ok[i] = local_pca(index, points, masses, radius, d, i, tangents.data() + i * n * n);
    }
  });
  std::string offending;
  std::size_t bad = 0;
  for (std::size_t i = 0; i < count; ++i) {
    if (ok[i]) continue;
    if (bad++ < 50) offending += (offending.empty() ? "" : ", ") + std::to_string(i);
  }
  if (bad > 0) {
    if (bad > 50) offending += ", ...";
    throw InvalidArgument("estimate_tangents_pca: " + std::to_string(bad) + " point(s) with fewer than " +
                          std::to_string(d) + " neighbors: " + offending);
  }
  return tangents;
}

std::size_t refresh_tangents_pca(const Eigen::MatrixXd& points, const Eigen::VectorXd& masses, double radius,
                                 int d, std::vector<double>& tangents, const std::vector<std::size_t>* subset) {
  const int n = static_cast<int>(points.rows());
  const std::size_t count = static_cast<std::size_t>(points.cols());
  const SpatialIndex index(points, radius);
  const std::size_t todo = subset ? subset->size() : count;
  std::vector<char> ok(todo, 0);
  std::vector<double> fresh(todo * n * n);
  for (std::size_t k = 0; k < todo; ++k) {
    if (subset && (*subset)[k] >= count) throw InvalidArgument("refresh_tangents_pca: index out of range");
  }
  parallel_for(todo, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      ok[k] = local_pca(index, points, masses, radius, d, subset ? (*subset)[k] : k, fresh.data() + k * n * n);
    }
  });
  std::size_t kept = 0;
  for (std::size_t k = 0; k < todo; ++k) {
    const std::size_t i = subset ? (*subset)[k] : k;
    if (ok[k]) {
      std::copy_n(fresh.begin() + k * n * n, n * n, tangents.begin() + i * n * n);
    } else {
      ++kept;
    }
  }
  return kept;
}

Eigen::VectorXd density_masses(const Eigen::MatrixXd& points, double radius, int d) {
  const std::size_t count = static_cast<std::size_t>(points.cols());
  const SpatialIndex index(points, radius);
  const double ball = unit_ball_volume(d) * std::pow(radius, d);
  Eigen::VectorXd masses(static_cast<Eigen::Index>(count));
  parallel_for(count, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto local = index.query_closed(points.col(static_cast<Eigen::Index>(i)).data(), radius);
      masses[static_cast<Eigen::Index>(i)] = ball / static_cast<double>(local.size());
    }
  });
  return masses;
}

}  // namespace varic
