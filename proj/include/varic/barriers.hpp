#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "varic/flow.hpp"
#include "varic/shapes.hpp"

namespace varic {

/// max over the points i closest to `center` and their neighbors j with
/// 0 < r_ij < eps of Pi_ij (x_i - x_j) . (x_i - center) / r_ij^2. Empty when
/// the closest points have no such neighbor.
std::optional<double> try_barrier_constant(const PointCloudVarifold& v, const Eigen::VectorXd& center,
                                           double epsilon, const OperatorSpec& spec);

/// Same, throwing InvalidArgument on an empty candidate set.
double barrier_constant(const PointCloudVarifold& v, const Eigen::VectorXd& center, double epsilon,
                        const OperatorSpec& spec);

struct BarrierStep {
  std::size_t step = 0;
  double time = 0.0;
  double r_min = 0.0;
  double r_max = 0.0;
  double bound = 0.0;  // NaN when the step is not constrained
  double slack = 0.0;  // >= -tolerance means the inequality holds
  // A second inequality checked at the same step (running bound, stable
  // argmin); NaN when absent.
  double secondary_bound = 0.0;
  double secondary_slack = 0.0;
  bool pass = true;
};

struct BarrierReport {
  std::string inequality;
  std::vector<BarrierStep> steps;
  bool pass = true;

  // Index into `steps` of the first failing step, or steps.size().
  std::size_t first_failure() const;
};

inline constexpr double kBarrierTolerance = 1e-10;

/// max_i |x_i - c| <= sqrt(R0^2 - 2 d t_k) + 1e-10 on every snapshot with
/// R0^2 > 2 d t_k. Throws InvalidArgument unless the first snapshot lies in
/// the closed ball B(c, R0).
BarrierReport check_internal_barrier(const Trajectory& traj, const Eigen::VectorXd& center, double R0, int d);

/// min_i |x_i - c| >= sqrt(R0^2 - 2 d t) - 10 dt on every snapshot, and the
/// running bound r(t)^2 >= r(0)^2 - 2 d int_0^t c(s) ds (upper rectangle
/// rule over snapshots, c = 0 where undefined) with the same tolerance.
/// Throws InvalidArgument unless the first snapshot lies outside B(c, R0).
BarrierReport check_external_barrier(const Trajectory& traj, const Eigen::VectorXd& center, double R0, int d);

/// For consecutive snapshots k, k+1 and p = argmin_i |x_i^k - c|:
/// |x_p^k - c|^2 <= |x_p^{k+1} - c|^2 + 2 d tau + 1e-10. When p is still the
/// argmin at k+1 also checks r_{k+1}^2 >= r_k^2 - 2 d tau - 1e-10. Snapshots
/// must be tau apart.
BarrierReport check_weak_external_discrete(const Trajectory& traj, const Eigen::VectorXd& center, int d, double tau);

void write_barrier_csv(std::ostream& out, const BarrierReport& report);

/// Specs whose estimator tends to zero on smooth samples: every term is one
/// of T, T.S, S.Tperp, T.Sperp.
bool is_null_spec(const OperatorSpec& spec);

struct ConvergenceOptions {
  ShapeSampler shape;  // count is replaced by the N rule
  std::vector<std::string> specs;
  std::vector<double> epsilons;  // strictly decreasing
  // N(eps) = ceil(n_coefficient * eps^-n_exponent)
  double n_coefficient = 0.0;
  double n_exponent = 0.0;
  int probes = 16;
  std::uint64_t probe_seed = 1;
  bool tangential = false;
  // Replace the exact tangents by local PCA at radius tangent_factor * eps.
  bool estimate_tangents = false;
  double tangent_factor = 1.0;
};

/// Default sampling per shape, tuned so every converging spec improves
/// monotonically over eps = 0.4 .. 0.05:
///  - circle: stratified jitter, N = ceil(8 eps^-3), PCA tangents;
///  - sphere (R^3): Fibonacci lattice, N = ceil(1.5 eps^-4.5), PCA tangents;
///  - torus (2, 0.5): staggered rings, N = ceil(8 eps^-4), PCA tangents;
///  - segment, plane: regular grids with exact tangents.
/// PCA tangents keep the exact-tangent identities (e.g. "2*Tperp" on a
/// circle is exact to round-off) from turning the sweep into round-off noise.
ConvergenceOptions default_convergence_options(ShapeKind kind);

struct ConvergenceRow {
  std::string spec;
  double epsilon = 0.0;
  std::size_t count = 0;
  double max_error = 0.0;  // vs the analytic H, or vs 0 for null specs
  double slope = 0.0;      // least-squares log-log slope of the spec's sweep
};

/// For each (spec, eps): max over the probe points of |H_eps^spec - target|.
/// Probes are drawn from points whose largest-eps ball stays on the shape.
std::vector<ConvergenceRow> convergence_study(const ConvergenceOptions& options);

void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows);

}  // namespace varic
