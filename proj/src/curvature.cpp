#include "varic/curvature.hpp"

#include <utility>

#include "varic/error.hpp"
#include "varic/parallel.hpp"
#include "varic/simd/kernels.hpp"

namespace varic {

CurvatureEstimator::CurvatureEstimator(const PointCloudVarifold& varifold, KernelPair pair, double epsilon)
    : varifold_(varifold),
      pair_(std::move(pair)),
      epsilon_(epsilon),
      prefactor_(0.0),
      xi_at_zero_(0.0),
      invalid_threshold_(1e-300 * static_cast<double>(varifold.size())),
      index_(),
      kernels_(&simd::active_kernels()) {
  if (!(epsilon > 0.0)) throw InvalidArgument("curvature: epsilon must be positive");
  if (pair_.n != varifold.n) throw InvalidArgument("curvature: kernel pair built for a different ambient dimension");
  prefactor_ = curvature_prefactor(pair_, varifold.d);
  xi_at_zero_ = pair_.xi.value(0.0);
  index_ = SpatialIndex(varifold.points, epsilon);
}

Neighborhood CurvatureEstimator::neighborhood(std::size_t i, bool tangential) const {
  const auto& v = varifold_;
  const int n = v.n;
  if (i >= v.size()) throw InvalidArgument("curvature: point index out of range");
  const double* xi = v.points.col(static_cast<Eigen::Index>(i)).data();

  Neighborhood hood;
  hood.center = i;
  const auto closed = index_.query_closed(xi, epsilon_);
  double coincident_mass = 0.0;
  for (std::size_t j : closed) {
    bool same = true;
    for (int c = 0; c < n && same; ++c) same = v.points(c, static_cast<Eigen::Index>(j)) == xi[c];
    if (same) {
      coincident_mass += v.masses[static_cast<Eigen::Index>(j)];
    } else {
      hood.neighbors.push_back(j);
    }
  }
  const std::size_t K = hood.neighbors.size();
  hood.offsets.resize(K * n);
  std::vector<double> mass(K);
  for (std::size_t k = 0; k < K; ++k) {
    const auto j = static_cast<Eigen::Index>(hood.neighbors[k]);
    for (int c = 0; c < n; ++c) hood.offsets[c * K + k] = v.points(c, j) - xi[c];
    mass[k] = v.masses[j];
  }

  const auto& kernels = *kernels_;
  hood.distances.resize(K);
  kernels.norms(hood.offsets.data(), K, n, K, hood.distances.data());

  std::vector<double> weight(K), mass_xi(K);
  const double inv_eps = 1.0 / epsilon_;
  const bool bump = pair_.is_default_bump();
  if (bump) {
    kernels.bump_weights(hood.distances.data(), mass.data(), K, inv_eps, n, weight.data(), mass_xi.data());
  } else {
    for (std::size_t k = 0; k < K; ++k) {
      const double r = hood.distances[k];
      const double s = r * inv_eps;
      weight[k] = mass[k] * pair_.rho.derivative(s) / r;
      mass_xi[k] = mass[k] * pair_.xi.value(s);
    }
  }
  hood.denominator = kernels.sum(mass_xi.data(), K) + coincident_mass * xi_at_zero_;

  if (tangential && K > 0) {
    const double* P = v.tangent_data(i);
    std::vector<double> projected(K * n, 0.0), tangential_r(K);
    for (std::size_t k = 0; k < K; ++k) {
      for (int c = 0; c < n; ++c) {
        const double u = hood.offsets[c * K + k];
        for (int r = 0; r < n; ++r) projected[r * K + k] += P[c * n + r] * u;
      }
    }
    kernels.norms(projected.data(), K, n, K, tangential_r.data());
    if (bump) {
      kernels.bump_weights(tangential_r.data(), mass.data(), K, inv_eps, n, weight.data(), mass_xi.data());
    } else {
      for (std::size_t k = 0; k < K; ++k) {
        weight[k] = mass[k] * pair_.rho.derivative(tangential_r[k] * inv_eps) / tangential_r[k];
      }
    }
    for (std::size_t k = 0; k < K; ++k) {
      if (tangential_r[k] < 1e-14 * epsilon_) weight[k] = 0.0;
    }
  }

  hood.valid = K > 0 && hood.denominator > invalid_threshold_;
  hood.omega.assign(K, 0.0);
  if (hood.valid) {
    for (std::size_t k = 0; k < K; ++k) hood.omega[k] = -prefactor_ * weight[k] / hood.denominator;
  }
  return hood;
}

Eigen::VectorXd CurvatureEstimator::evaluate(const Neighborhood& hood, const OperatorSpec& spec) const {
  const int n = varifold_.n;
  Eigen::VectorXd H = Eigen::VectorXd::Zero(n);
  if (!hood.valid) return H;
  const std::size_t K = hood.count();
  const auto& kernels = *kernels_;
  const double* T = varifold_.tangent_data(hood.center);

  // sum_j omega_j (x_j - x_i), shared by every term without S atoms.
  Eigen::VectorXd id_sum(n);
  for (int c = 0; c < n; ++c) id_sum[c] = kernels.dot(hood.omega.data(), hood.offsets.data() + c * K, K);

  std::vector<std::pair<OperatorTerm, Eigen::VectorXd>> unit_sums;
  Eigen::VectorXd u(n), out(n), scratch(n);
  for (const auto& term : spec.terms) {
    OperatorTerm unit = term;
    unit.coefficient = 1.0;
    const Eigen::VectorXd* sum = nullptr;
    for (const auto& [key, value] : unit_sums) {
      if (key == unit) sum = &value;
    }
    if (sum == nullptr) {
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
      if (!unit.depends_on_neighbor()) {
        apply_term(unit, n, T, T, id_sum.data(), acc.data(), scratch.data());
      } else {
        for (std::size_t k = 0; k < K; ++k) {
          for (int c = 0; c < n; ++c) u[c] = hood.offsets[c * K + k];
          apply_term(unit, n, T, varifold_.tangent_data(hood.neighbors[k]), u.data(), out.data(), scratch.data());
          acc += hood.omega[k] * out;
        }
      }
      unit_sums.emplace_back(unit, std::move(acc));
      sum = &unit_sums.back().second;
    }
    H += term.coefficient * *sum;
  }
  return H / epsilon_;
}

PointCurvature CurvatureEstimator::at(std::size_t i, const OperatorSpec& spec, bool tangential) const {
  const auto hood = neighborhood(i, tangential);
  return {evaluate(hood, spec), hood.denominator, hood.valid};
}

CurvatureField CurvatureEstimator::field(const OperatorSpec& spec, bool tangential) const {
  const std::size_t count = varifold_.size();
  CurvatureField f;
  f.H = Eigen::MatrixXd::Zero(varifold_.n, static_cast<Eigen::Index>(count));
  f.denominator = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(count));
  f.valid.assign(count, 0);
  parallel_for(count, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto p = at(i, spec, tangential);
      f.H.col(static_cast<Eigen::Index>(i)) = p.H;
      f.denominator[static_cast<Eigen::Index>(i)] = p.denominator;
      f.valid[i] = p.valid;
    }
  });
  return f;
}

PointCurvature mean_curvature(const PointCloudVarifold& v, const KernelPair& pair, double epsilon,
                              const OperatorSpec& spec, std::size_t i) {
  return CurvatureEstimator(v, pair, epsilon).at(i, spec, false);
}

PointCurvature mean_curvature_tangential(const PointCloudVarifold& v, const KernelPair& pair, double epsilon,
                                         const OperatorSpec& spec, std::size_t i) {
  return CurvatureEstimator(v, pair, epsilon).at(i, spec, true);
}

CurvatureField mean_curvature_field(const PointCloudVarifold& v, const KernelPair& pair, double epsilon,
                                    const OperatorSpec& spec, bool tangential) {
  return CurvatureEstimator(v, pair, epsilon).field(spec, tangential);
}

}  // namespace varic
