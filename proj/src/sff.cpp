#include "varic/sff.hpp"

#include <algorithm>
#include <cmath>

#include "varic/error.hpp"
#include "varic/parallel.hpp"

namespace varic {

double Tensor3::max_abs() const {
  double m = 0.0;
  for (double x : data) m = std::max(m, std::abs(x));
  return m;
}

PointTensor beta_tensor(const CurvatureEstimator& est, const OperatorSpec& spec, std::size_t i) {
  const auto& v = est.varifold();
  const int n = v.n;
  PointTensor out{Tensor3(n), false};
  const auto hood = est.neighborhood(i);
  if (!hood.valid) return out;
  out.valid = true;

  const std::size_t K = hood.count();
  const double* T = v.tangent_data(i);
  Eigen::VectorXd u(n), term_out(n), scratch(n), image(n);
  for (std::size_t k = 0; k < K; ++k) {
    const std::size_t l = hood.neighbors[k];
    const double* S = v.tangent_data(l);
    for (int c = 0; c < n; ++c) u[c] = hood.offsets[c * K + k];
    image.setZero();
    for (const auto& term : spec.terms) {
      apply_term(term, n, T, S, u.data(), term_out.data(), scratch.data());
      image += term.coefficient * term_out;
    }
    image *= hood.omega[k];
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        for (int c = 0; c < n; ++c) out.value(a, b, c) += image[a] * S[c * n + b];
      }
    }
  }
  for (double& x : out.value.data) x /= est.epsilon();
  return out;
}

PointMatrix c_matrix(const CurvatureEstimator& est, std::size_t i) {
  const auto& v = est.varifold();
  const int n = v.n;
  PointMatrix out{Eigen::MatrixXd::Zero(n, n), false};
  const double* x = v.points.col(static_cast<Eigen::Index>(i)).data();
  const auto ball = est.index().query_closed(x, est.epsilon());
  double denominator = 0.0;
  for (std::size_t l : ball) {
    double r2 = 0.0;
    for (int c = 0; c < n; ++c) {
      const double diff = v.points(c, static_cast<Eigen::Index>(l)) - x[c];
      r2 += diff * diff;
    }
    const double w = v.masses[static_cast<Eigen::Index>(l)] * est.pair().eta.value(std::sqrt(r2) / est.epsilon());
    out.value += w * v.tangent(l);
    denominator += w;
  }
  out.valid = denominator > 1e-300 * static_cast<double>(v.size());
  if (out.valid) {
    out.value /= denominator;
  } else {
    out.value.setZero();
  }
  return out;
}

Tensor3 assemble_A(const Tensor3& beta, const Eigen::MatrixXd& c, const Eigen::VectorXd& H) {
  const int n = beta.n;
  if (c.rows() != n || c.cols() != n || H.size() != n) throw InvalidArgument("assemble_A: dimension mismatch");
  const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n) + c;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const auto& sv = svd.singularValues();
  const double smallest = sv[sv.size() - 1];
  if (!(smallest > 0.0) || sv[0] / smallest > 1e8) {
    throw NumericalError("assemble_A: I + c is singular or ill-conditioned");
  }
  const Eigen::VectorXd y = M.partialPivLu().solve(H);
  Tensor3 A = beta;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int k = 0; k < n; ++k) A(a, b, k) -= c(b, k) * y[a];
    }
  }
  return A;
}

SffPoint sff_at(const CurvatureEstimator& est, const OperatorSpec& spec, std::size_t i,
                const OperatorSpec& curvature_spec) {
  SffPoint out;
  const int n = est.varifold().n;
  auto beta = beta_tensor(est, spec, i);
  auto c = c_matrix(est, i);
  const auto H = est.at(i, curvature_spec);
  out.beta = std::move(beta.value);
  out.c = std::move(c.value);
  out.valid = beta.valid && c.valid && H.valid;
  out.A = out.valid ? assemble_A(out.beta, out.c, H.H) : Tensor3(n);
  return out;
}

SffField sff_field(const CurvatureEstimator& est, const OperatorSpec& spec, const OperatorSpec& curvature_spec) {
  SffField field;
  field.points.resize(est.varifold().size());
  parallel_for(field.points.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) field.points[i] = sff_at(est, spec, i, curvature_spec);
  });
  return field;
}

}  // namespace varic
