#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "varic/kernels.hpp"
#include "varic/operator.hpp"
#include "varic/varifold.hpp"

namespace varic {

enum class Scheme { ContinuousRk4, Explicit, Implicit };
enum class MassPolicy { Frozen, RecomputePerStep };
enum class TangentPolicy { Frozen, RecomputePerStep, RecomputePerRhs };

// Accepts "continuous-rk4" (or "rk4"), "explicit", "implicit".
Scheme parse_scheme(const std::string& name);
MassPolicy parse_mass_policy(const std::string& name);
TangentPolicy parse_tangent_policy(const std::string& name);
std::string scheme_name(Scheme s);
std::string mass_policy_name(MassPolicy p);
std::string tangent_policy_name(TangentPolicy p);

struct FlowConfig {
  double epsilon = 0.1;
  double tau = 1e-3;  // dt for the continuous scheme
  Scheme scheme = Scheme::Implicit;
  OperatorSpec op = parse_operator("2*Id");
  MassPolicy mass_policy = MassPolicy::Frozen;
  TangentPolicy tangent_policy = TangentPolicy::RecomputePerStep;
  // Implicit scheme: recompute masses (resp. the weights omega) from the
  // unknown positions by an outer fixed-point loop.
  bool implicit_masses = false;
  bool implicit_weights = false;
  std::size_t steps = 100;
  double solver_tolerance = 1e-12;
  int solver_max_iterations = 500;
  double tangent_radius = 0.0;  // PCA radius; 0 means epsilon
  Eigen::VectorXd center;       // diagnostics reference; empty means the origin

  // Throws InvalidArgument unless epsilon > 0, tau >= 0 and the solver
  // settings are usable.
  void validate() const;
};

/// Velocity x_i' = (1/eps) sum_j omega_ij Pi_ij (x_j - x_i) of every point
/// (n x N); points without neighbors get zero.
Eigen::MatrixXd rhs(const PointCloudVarifold& v, const KernelPair& pair, double epsilon, const OperatorSpec& spec);

struct StepStats {
  int iterations = 0;        // inner solver iterations, summed over outer passes
  int outer_iterations = 0;  // fixed-point passes (1 without implicit masses/weights)
  double residual = 0.0;     // ||A X^{k+1} - X^k|| / ||X^k|| of the accepted solve
  bool direct = false;       // a direct factorization produced the answer
};

PointCloudVarifold step_continuous(const PointCloudVarifold& v, const KernelPair& pair, const FlowConfig& config);
PointCloudVarifold step_explicit(const PointCloudVarifold& v, const KernelPair& pair, const FlowConfig& config);

/// Solves A X^{k+1} = X^k with A_ii = I + (tau/eps) sum_j omega_ij Pi_ij and
/// A_ij = -(tau/eps) omega_ij Pi_ij by block Jacobi; falls back to a direct
/// factorization when Jacobi stalls. Throws NumericalError when no solve
/// reaches the tolerance or the outer loop does not settle.
PointCloudVarifold step_implicit(const PointCloudVarifold& v, const KernelPair& pair, const FlowConfig& config,
                                 StepStats* stats = nullptr);

/// One step of config.scheme.
PointCloudVarifold step(const PointCloudVarifold& v, const KernelPair& pair, const FlowConfig& config,
                        StepStats* stats = nullptr);

struct Snapshot {
  std::size_t step = 0;
  double time = 0.0;
  PointCloudVarifold varifold;
};

struct StepDiagnostics {
  std::size_t step = 0;
  double time = 0.0;
  double min_radius = 0.0;
  double max_radius = 0.0;
  double barrier_constant = 0.0;  // NaN when undefined
  int solver_iterations = 0;
  double residual = 0.0;
};

struct Trajectory {
  FlowConfig config;
  std::vector<Snapshot> snapshots;           // step 0, every k-th step, and the last step
  std::vector<StepDiagnostics> diagnostics;  // every step including 0
};

/// Advances `config.steps` steps from v0. Deterministic.
Trajectory run_flow(const PointCloudVarifold& v0, const KernelPair& pair, const FlowConfig& config,
                    std::size_t snapshot_every = 1);

}  // namespace varic
