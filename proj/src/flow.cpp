#include "varic/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "varic/barriers.hpp"
#include "varic/curvature.hpp"
#include "varic/error.hpp"
#include "varic/parallel.hpp"

namespace varic {

Scheme parse_scheme(const std::string& name) {
  if (name == "continuous-rk4" || name == "rk4") return Scheme::ContinuousRk4;
  if (name == "explicit") return Scheme::Explicit;
  if (name == "implicit") return Scheme::Implicit;
  throw InvalidArgument("unknown scheme '" + name + "' (rk4, explicit, implicit)");
}

MassPolicy parse_mass_policy(const std::string& name) {
  if (name == "frozen") return MassPolicy::Frozen;
  if (name == "recompute-per-step") return MassPolicy::RecomputePerStep;
  throw InvalidArgument("unknown mass policy '" + name + "' (frozen, recompute-per-step)");
}

TangentPolicy parse_tangent_policy(const std::string& name) {
  if (name == "frozen") return TangentPolicy::Frozen;
  if (name == "recompute-per-step") return TangentPolicy::RecomputePerStep;
  if (name == "recompute-per-rhs") return TangentPolicy::RecomputePerRhs;
  throw InvalidArgument("unknown tangent policy '" + name + "' (frozen, recompute-per-step, recompute-per-rhs)");
}

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::ContinuousRk4: return "continuous-rk4";
    case Scheme::Explicit: return "explicit";
    case Scheme::Implicit: return "implicit";
  }
  return "?";
}

std::string mass_policy_name(MassPolicy p) { return p == MassPolicy::Frozen ? "frozen" : "recompute-per-step"; }

std::string tangent_policy_name(TangentPolicy p) {
  switch (p) {
    case TangentPolicy::Frozen: return "frozen";
    case TangentPolicy::RecomputePerStep: return "recompute-per-step";
    case TangentPolicy::RecomputePerRhs: return "recompute-per-rhs";
  }
  return "?";
}

void FlowConfig::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InvalidArgument("flow: epsilon must be positive");
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw InvalidArgument("flow: tau must be non-negative");
  if (!(solver_tolerance > 0.0)) throw InvalidArgument("flow: solver tolerance must be positive");
  if (solver_max_iterations < 1) throw InvalidArgument("flow: solver needs at least one iteration");
  if (tangent_radius < 0.0) throw InvalidArgument("flow: tangent radius must be non-negative");
}

Eigen::MatrixXd rhs(const PointCloudVarifold& v, const KernelPair& pair, double epsilon, const OperatorSpec& spec) {
  return CurvatureEstimator(v, pair, epsilon).field(spec).H;
}

namespace {

double tangent_radius(const FlowConfig& c) { return c.tangent_radius > 0.0 ? c.tangent_radius : c.epsilon; }

// Mass and tangent refresh after a step has moved the points.
void apply_policies(PointCloudVarifold& v, const FlowConfig& config, bool masses_done = false) {
  if (config.mass_policy == MassPolicy::RecomputePerStep && !masses_done) {
    v.masses = density_masses(v.points, config.epsilon, v.d);
  }
  if (config.tangent_policy != TangentPolicy::Frozen) {
    refresh_tangents_pca(v.points, v.masses, tangent_radius(config), v.d, v.tangents);
  }
}

// A X = b with A_ii = diag[i] and A_ij = -B_ij for the listed neighbors.
struct BlockSystem {
  int n = 0;
  std::size_t count = 0;
  std::vector<Eigen::MatrixXd> diag;
  std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> diag_lu;
  std::vector<std::vector<std::size_t>> cols;
  std::vector<std::vector<Eigen::MatrixXd>> blocks;

  Eigen::MatrixXd multiply(const Eigen::MatrixXd& X) const {
    Eigen::MatrixXd out(n, static_cast<Eigen::Index>(count));
    for (std::size_t i = 0; i < count; ++i) {
      Eigen::VectorXd acc = diag[i] * X.col(static_cast<Eigen::Index>(i));
      for (std::size_t k = 0; k < cols[i].size(); ++k) acc -= blocks[i][k] * X.col(static_cast<Eigen::Index>(cols[i][k]));
      out.col(static_cast<Eigen::Index>(i)) = acc;
    }
    return out;
  }
};

BlockSystem assemble(const PointCloudVarifold& w, const KernelPair& pair, const FlowConfig& config) {
  const int n = w.n;
  const std::size_t N = w.size();
  BlockSystem sys;
  sys.n = n;
  sys.count = N;
  sys.diag.assign(N, Eigen::MatrixXd::Identity(n, n));
  sys.diag_lu.resize(N);
  sys.cols.resize(N);
  sys.blocks.resize(N);
  const CurvatureEstimator est(w, pair, config.epsilon);
  const double scale = config.tau / config.epsilon;
  const bool identity = is_identity_multiple(config.op);
  const double id_coefficient = identity ? identity_coefficient(config.op) : 0.0;
  parallel_for(N, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto hood = est.neighborhood(i);
      if (hood.valid) {
        const Eigen::MatrixXd T = w.tangent(i);
        for (std::size_t k = 0; k < hood.count(); ++k) {
          if (hood.omega[k] == 0.0) continue;
          const std::size_t j = hood.neighbors[k];
          Eigen::MatrixXd B = identity ? Eigen::MatrixXd(id_coefficient * Eigen::MatrixXd::Identity(n, n))
                                       : compile_operator(config.op, T, Eigen::MatrixXd(w.tangent(j)));
          B *= scale * hood.omega[k];
          sys.diag[i] += B;
          sys.cols[i].push_back(j);
          sys.blocks[i].push_back(std::move(B));
        }
      }
      sys.diag_lu[i].compute(sys.diag[i]);
    }
  });
  return sys;
}

struct SolveResult {
  Eigen::MatrixXd X;
  int iterations = 0;
  double residual = 0.0;  // relative
  bool direct = false;
};

double relative(double r, double scale) { return scale > 0.0 ? r / scale : r; }

std::string format_g(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

Eigen::MatrixXd solve_direct(const BlockSystem& sys, const Eigen::MatrixXd& b) {
  const int n = sys.n;
  const auto size = static_cast<Eigen::Index>(n * sys.count);
  const Eigen::Map<const Eigen::VectorXd> rhs_vec(b.data(), size);
  Eigen::VectorXd x;
  if (size <= 2000) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(size, size);
    for (std::size_t i = 0; i < sys.count; ++i) {
      const auto r0 = static_cast<Eigen::Index>(i * n);
      A.block(r0, r0, n, n) += sys.diag[i];
      for (std::size_t k = 0; k < sys.cols[i].size(); ++k) {
        A.block(r0, static_cast<Eigen::Index>(sys.cols[i][k] * n), n, n) -= sys.blocks[i][k];
      }
    }
    x = A.partialPivLu().solve(rhs_vec);
  } else {
    std::vector<Eigen::Triplet<double>> entries;
    for (std::size_t i = 0; i < sys.count; ++i) {
      const auto r0 = static_cast<Eigen::Index>(i * n);
      for (int a = 0; a < n; ++a) {
        for (int c = 0; c < n; ++c) entries.emplace_back(r0 + a, r0 + c, sys.diag[i](a, c));
      }
      for (std::size_t k = 0; k < sys.cols[i].size(); ++k) {
        const auto c0 = static_cast<Eigen::Index>(sys.cols[i][k] * n);
        for (int a = 0; a < n; ++a) {
          for (int c = 0; c < n; ++c) entries.emplace_back(r0 + a, c0 + c, -sys.blocks[i][k](a, c));
        }
      }
    }
    Eigen::SparseMatrix<double> A(size, size);
    A.setFromTriplets(entries.begin(), entries.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw NumericalError("implicit step: sparse factorization failed");
    x = lu.solve(rhs_vec);
  }
  return Eigen::Map<Eigen::MatrixXd>(x.data(), n, static_cast<Eigen::Index>(sys.count));
}

SolveResult solve(const BlockSystem& sys, const Eigen::MatrixXd& b, const Eigen::MatrixXd& guess, const FlowConfig& config) {
  const double scale = b.norm();
  const double target = config.solver_tolerance * scale;
  SolveResult out;
  out.X = guess;
  double residual = (sys.multiply(out.X) - b).norm();
  double checkpoint = residual;
  Eigen::MatrixXd next(b.rows(), b.cols());
  while (residual > target && out.iterations < config.solver_max_iterations) {
    parallel_for(sys.count, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        Eigen::VectorXd acc = b.col(static_cast<Eigen::Index>(i));
        for (std::size_t k = 0; k < sys.cols[i].size(); ++k) {
          acc += sys.blocks[i][k] * out.X.col(static_cast<Eigen::Index>(sys.cols[i][k]));
        }
        next.col(static_cast<Eigen::Index>(i)) = sys.diag_lu[i].solve(acc);
      }
    });
    out.X.swap(next);
    residual = (sys.multiply(out.X) - b).norm();
    ++out.iterations;
    // Stalled: less than a factor 2 gained over 20 sweeps.
    if (out.iterations % 20 == 0) {
      if (!(residual < 0.5 * checkpoint)) break;
      checkpoint = residual;
    }
  }
  if (!(residual <= target)) {
    out.X = solve_direct(sys, b);
    out.direct = true;
    residual = (sys.multiply(out.X) - b).norm();
    // A couple of refinement sweeps absorb the factorization round-off.
    for (int round = 0; round < 2 && residual > target; ++round) {
      out.X += solve_direct(sys, b - sys.multiply(out.X));
      residual = (sys.multiply(out.X) - b).norm();
    }
  }
  out.residual = relative(residual, scale);
  if (!(residual <= target)) {
    throw NumericalError("implicit step: linear solve stopped at relative residual " + format_g(out.residual) +
                         " (tolerance " + format_g(config.solver_tolerance) + ")");
  }
  return out;
}

}  // namespace

PointCloudVarifold step_continuous(const PointCloudVarifold& v, const KernelPair& pair, const FlowConfig& config) {
  config.validate();
  if (config.tau == 0.0) return v;
  const double dt = config.tau;
  PointCloudVarifold stage = v;
  auto velocity = [&](const Eigen::MatrixXd& X) {
    stage.points = X;
    if (config.tangent_policy == TangentPolicy::RecomputePerRhs) {
      stage.tangents = v.tangents;
      refresh_tangents_pca(stage.points, stage.masses, tangent_radius(config), v.d, stage.tangents);
    }
    return rhs(stage, pair, config.epsilon, config.op);
  };
  const Eigen::MatrixXd& X = v.points;
  const Eigen::MatrixXd k1 = velocity(X);
  const Eigen::MatrixXd k2 = velocity(X + 0.5 * dt * k1);
  const Eigen::MatrixXd k3 = velocity(X + 0.5 * dt * k2);
  const Eigen::MatrixXd k4 = velocity(X + dt * k3);
  PointCloudVarifold out = v;
  out.points = X + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  apply_policies(out, config);
  return out;
}

PointCloudVarifold step_explicit(const PointCloudVarifold& v, const KernelPair& pair, const FlowConfig& config) {
  config.validate();
  if (config.tau == 0.0) return v;
  PointCloudVarifold out = v;
  out.points = v.points + config.tau * rhs(v, pair, config.epsilon, config.op);
  apply_policies(out, config);
  return out;
}

PointCloudVarifold step_implicit(const PointCloudVarifold& v, const KernelPair& pair, const FlowConfig& config,
                                 StepStats* stats) {
  config.validate();
  StepStats local;
  StepStats& st = stats ? *stats : local;
  st = StepStats{};
  if (config.tau == 0.0) return v;

  const Eigen::MatrixXd& b = v.points;
  const bool outer = config.implicit_masses || config.implicit_weights;
  PointCloudVarifold w = v;
  Eigen::MatrixXd candidate = b;
  Eigen::MatrixXd solution;
  for (;;) {
    if (config.implicit_weights) w.points = candidate;
    if (config.implicit_masses) w.masses = density_masses(candidate, config.epsilon, v.d);
    const BlockSystem sys = assemble(w, pair, config);
    const SolveResult result = solve(sys, b, candidate, config);
    st.iterations += result.iterations;
    st.residual = result.residual;
    st.direct = st.direct || result.direct;
    ++st.outer_iterations;
    solution = result.X;
    if (!outer) break;
    const double change = (solution - candidate).norm();
    candidate = solution;
    if (change <= config.solver_tolerance * std::max(b.norm(), 1.0)) break;
    if (st.outer_iterations >= config.solver_max_iterations) {
      throw NumericalError("implicit step: outer fixed point did not settle (last change " + format_g(change) +
                           ")");
    }
  }

  PointCloudVarifold out = v;
  out.points = solution;
  if (config.implicit_masses) out.masses = density_masses(out.points, config.epsilon, v.d);
  apply_policies(out, config, config.implicit_masses);
  return out;
}

PointCloudVarifold step(const PointCloudVarifold& v, const KernelPair& pair, const FlowConfig& config,
                        StepStats* stats) {
  switch (config.scheme) {
    case Scheme::ContinuousRk4:
      if (stats) *stats = StepStats{};
      return step_continuous(v, pair, config);
    case Scheme::Explicit:
      if (stats) *stats = StepStats{};
      return step_explicit(v, pair, config);
    case Scheme::Implicit: return step_implicit(v, pair, config, stats);
  }
  throw InvalidArgument("flow: unknown scheme");
}

namespace {

StepDiagnostics diagnose(const PointCloudVarifold& v, const FlowConfig& config, const Eigen::VectorXd& center,
                         std::size_t k, const StepStats& stats) {
  StepDiagnostics d;
  d.step = k;
  d.time = static_cast<double>(k) * config.tau;
  d.solver_iterations = stats.iterations;
  d.residual = stats.residual;
  if (v.size() == 0) return d;
  const Eigen::VectorXd radii = (v.points.colwise() - center).colwise().norm();
  d.min_radius = radii.minCoeff();
  d.max_radius = radii.maxCoeff();
  const auto c = try_barrier_constant(v, center, config.epsilon, config.op);
  d.barrier_constant = c ? *c : std::numeric_limits<double>::quiet_NaN();
  return d;
}

}  // namespace

Trajectory run_flow(const PointCloudVarifold& v0, const KernelPair& pair, const FlowConfig& config,
                    std::size_t snapshot_every) {
  config.validate();
  if (config.steps > 0 && !(config.tau > 0.0)) throw InvalidArgument("flow: tau must be positive to advance");
  if (snapshot_every == 0) throw InvalidArgument("flow: snapshot interval must be positive");
  const Eigen::VectorXd center = config.center.size() == 0 ? Eigen::VectorXd::Zero(v0.n) : config.center;
  if (center.size() != v0.n) throw InvalidArgument("flow: reference center has the wrong dimension");

  Trajectory traj;
  traj.config = config;
  traj.snapshots.push_back({0, 0.0, v0});
  traj.diagnostics.push_back(diagnose(v0, config, center, 0, StepStats{}));
  PointCloudVarifold current = v0;
  for (std::size_t k = 1; k <= config.steps; ++k) {
    StepStats stats;
    current = step(current, pair, config, &stats);
    traj.diagnostics.push_back(diagnose(current, config, center, k, stats));
    if (k % snapshot_every == 0 || k == config.steps) {
      traj.snapshots.push_back({k, static_cast<double>(k) * config.tau, current});
    }
  }
  return traj;
}

}  // namespace varic
