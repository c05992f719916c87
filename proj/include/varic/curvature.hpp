#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "varic/kernels.hpp"
#include "varic/neighbors.hpp"
#include "varic/operator.hpp"
#include "varic/simd/kernels.hpp"
#include "varic/varifold.hpp"

namespace varic {

/// Everything the estimators need about one point's eps-ball.
///
/// omega[j] is the flow weight of neighbors[j]:
///   omega_ij = -(C_xi/C_rho) m_j rho'(r_ij / eps) / (r_ij D_i),
///   D_i = sum_l m_l xi(r_il / eps)   (all l, including i itself),
/// so that H_i = (1/eps) sum_j omega_ij Pi_ij (x_j - x_i).
struct Neighborhood {
  std::size_t center = 0;
  std::vector<std::size_t> neighbors;  // ascending, 0 < r_ij <= eps
  std::vector<double> offsets;         // x_j - x_i, coordinate-major: offsets[c * K + j]
  std::vector<double> distances;       // r_ij
  std::vector<double> omega;
  double denominator = 0.0;
  bool valid = false;

  std::size_t count() const { return neighbors.size(); }
};

struct PointCurvature {
  Eigen::VectorXd H;
  double denominator = 0.0;
  bool valid = false;
};

struct CurvatureField {
  Eigen::MatrixXd H;  // n x N
  Eigen::VectorXd denominator;
  std::vector<char> valid;

  std::size_t size() const { return valid.size(); }
};

/// Approximate mean curvature H_eps^Pi of a point-cloud varifold.
///
/// Holds a reference to the varifold; the varifold must outlive the
/// estimator and stay unmodified. Evaluation is read-only and thread-safe.
/// A point is invalid (H = 0) when it has no neighbor in its eps-ball or
/// D_i <= 1e-300 N.
class CurvatureEstimator {
 public:
  CurvatureEstimator(const PointCloudVarifold& varifold, KernelPair pair, double epsilon);

  const PointCloudVarifold& varifold() const { return varifold_; }
  const KernelPair& pair() const { return pair_; }
  double epsilon() const { return epsilon_; }
  const SpatialIndex& index() const { return index_; }
  // C_xi / C_rho
  double prefactor() const { return prefactor_; }

  // Inner-loop variant; defaults to simd::active_kernels().
  const simd::KernelTable& kernels() const { return *kernels_; }
  void use_kernels(const simd::KernelTable& table) { kernels_ = &table; }

  /// With `tangential`, rho' is evaluated at |P_i (x_j - x_i)| / eps and
  /// 1/r_ij becomes 1/|P_i (x_j - x_i)|; pairs with that norm below
  /// 1e-14 eps are skipped. D_i is unchanged.
  Neighborhood neighborhood(std::size_t i, bool tangential = false) const;

  PointCurvature at(std::size_t i, const OperatorSpec& spec, bool tangential = false) const;

  /// Every point; deterministic and independent of the thread count.
  CurvatureField field(const OperatorSpec& spec, bool tangential = false) const;

  /// (1/eps) sum_j omega_ij spec(x_j - x_i) for an already built neighborhood.
  Eigen::VectorXd evaluate(const Neighborhood& hood, const OperatorSpec& spec) const;

 private:
  const PointCloudVarifold& varifold_;
  KernelPair pair_;
  double epsilon_;
  double prefactor_;
  double xi_at_zero_;
  double invalid_threshold_;
  SpatialIndex index_;
  const simd::KernelTable* kernels_;
};

PointCurvature mean_curvature(const PointCloudVarifold& v, const KernelPair& pair, double epsilon,
                              const OperatorSpec& spec, std::size_t i);

PointCurvature mean_curvature_tangential(const PointCloudVarifold& v, const KernelPair& pair, double epsilon,
                                         const OperatorSpec& spec, std::size_t i);

CurvatureField mean_curvature_field(const PointCloudVarifold& v, const KernelPair& pair, double epsilon,
                                    const OperatorSpec& spec, bool tangential = false);

}  // namespace varic
