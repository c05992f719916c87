#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "varic/curvature.hpp"

namespace varic {

/// Dense rank-3 tensor of side n, entry (i, j, k) at (i * n + j) * n + k.
struct Tensor3 {
  int n = 0;
  std::vector<double> data;

  Tensor3() = default;
  explicit Tensor3(int side) : n(side), data(static_cast<std::size_t>(side) * side * side, 0.0) {}

  double& operator()(int i, int j, int k) { return data[(static_cast<std::size_t>(i) * n + j) * n + k]; }
  double operator()(int i, int j, int k) const { return data[(static_cast<std::size_t>(i) * n + j) * n + k]; }
  double max_abs() const;
};

struct PointTensor {
  Tensor3 value;
  bool valid = false;
};

struct PointMatrix {
  Eigen::MatrixXd value;
  bool valid = false;
};

struct SffPoint {
  Tensor3 beta;
  Eigen::MatrixXd c;
  Tensor3 A;
  bool valid = false;
};

struct SffField {
  std::vector<SffPoint> points;
};

/// beta_ijk = (1/eps) sum_l omega_l (P_l)_jk [Pi_l (x_l - x)]_i with the same
/// weights (and validity) as the mean curvature estimator.
PointTensor beta_tensor(const CurvatureEstimator& est, const OperatorSpec& spec, std::size_t i);

/// c_jk = sum_l m_l (P_l)_jk eta(r_l/eps) / sum_l m_l eta(r_l/eps), both sums
/// over the closed eps-ball (i itself counts through eta(0)).
PointMatrix c_matrix(const CurvatureEstimator& est, std::size_t i);

/// A_ijk = beta_ijk - c_jk ((I + c)^{-1} H)_i via an LU solve. Throws
/// NumericalError when I + c is singular or its condition number exceeds 1e8.
Tensor3 assemble_A(const Tensor3& beta, const Eigen::MatrixXd& c, const Eigen::VectorXd& H);

/// beta with `spec`, c, and A using H_eps with `curvature_spec` (default "S").
SffPoint sff_at(const CurvatureEstimator& est, const OperatorSpec& spec, std::size_t i,
                const OperatorSpec& curvature_spec);

SffField sff_field(const CurvatureEstimator& est, const OperatorSpec& spec, const OperatorSpec& curvature_spec);

}  // namespace varic
