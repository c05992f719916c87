#include "varic/barriers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "varic/cloud_io.hpp"
#include "varic/curvature.hpp"
#include "varic/error.hpp"
#include "varic/rng.hpp"

namespace varic {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::VectorXd squared_radii(const PointCloudVarifold& v, const Eigen::VectorXd& center) {
  if (center.size() != v.n) throw InvalidArgument("barrier: center has the wrong dimension");
  return (v.points.colwise() - center).colwise().squaredNorm().transpose();
}

std::size_t argmin(const Eigen::VectorXd& x) {
  Eigen::Index i = 0;
  x.minCoeff(&i);
  return static_cast<std::size_t>(i);
}

void finish(BarrierReport& report) {
  report.pass = std::all_of(report.steps.begin(), report.steps.end(), [](const BarrierStep& s) { return s.pass; });
}

BarrierStep blank_step(const Snapshot& snap, const Eigen::VectorXd& r2) {
  BarrierStep s;
  s.step = snap.step;
  s.time = snap.time;
  if (r2.size() > 0) {
    s.r_min = std::sqrt(r2.minCoeff());
    s.r_max = std::sqrt(r2.maxCoeff());
  }
  s.bound = s.slack = s.secondary_bound = s.secondary_slack = kNaN;
  return s;
}

}  // namespace

std::optional<double> try_barrier_constant(const PointCloudVarifold& v, const Eigen::VectorXd& center,
                                           double epsilon, const OperatorSpec& spec) {
  if (!(epsilon > 0.0)) throw InvalidArgument("barrier_constant: epsilon must be positive");
  const Eigen::VectorXd r2 = squared_radii(v, center);
  if (r2.size() == 0) return std::nullopt;
  const double smallest = r2.minCoeff();
  const int n = v.n;
  std::optional<double> best;
  Eigen::VectorXd diff(n);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (r2[static_cast<Eigen::Index>(i)] != smallest) continue;
    const Eigen::VectorXd xi = v.points.col(static_cast<Eigen::Index>(i));
    const Eigen::MatrixXd T = v.tangent(i);
    for (std::size_t j = 0; j < v.size(); ++j) {
      diff = xi - v.points.col(static_cast<Eigen::Index>(j));
      const double r = diff.norm();
      if (!(r > 0.0) || !(r < epsilon)) continue;
      const Eigen::MatrixXd Pi = compile_operator(spec, T, Eigen::MatrixXd(v.tangent(j)));
      const double value = (Pi * diff).dot(xi - center) / (r * r);
      if (!best || value > *best) best = value;
    }
  }
  return best;
}

double barrier_constant(const PointCloudVarifold& v, const Eigen::VectorXd& center, double epsilon,
                        const OperatorSpec& spec) {
  const auto c = try_barrier_constant(v, center, epsilon, spec);
  if (!c) throw InvalidArgument("barrier_constant: the closest points have no neighbor within epsilon");
  return *c;
}

std::size_t BarrierReport::first_failure() const {
  for (std::size_t k = 0; k < steps.size(); ++k) {
    if (!steps[k].pass) return k;
  }
  return steps.size();
}

BarrierReport check_internal_barrier(const Trajectory& traj, const Eigen::VectorXd& center, double R0, int d) {
  BarrierReport report;
  report.inequality = "max_i |x_i - c| <= sqrt(R0^2 - 2 d t)";
  if (traj.snapshots.empty()) return report;
  const double limit = R0 * R0;
  if (squared_radii(traj.snapshots.front().varifold, center).maxCoeff() > limit * (1.0 + 1e-14)) {
    throw InvalidArgument("internal barrier: initial cloud is not inside B(c, R0)");
  }
  for (const auto& snap : traj.snapshots) {
    const Eigen::VectorXd r2 = squared_radii(snap.varifold, center);
    BarrierStep s = blank_step(snap, r2);
    const double remaining = limit - 2.0 * d * snap.time;
    if (remaining > 0.0 && r2.size() > 0) {
      s.bound = std::sqrt(remaining);
      s.slack = s.bound - s.r_max;
      s.pass = s.slack >= -kBarrierTolerance;
    }
    report.steps.push_back(s);
  }
  finish(report);
  return report;
}

BarrierReport check_external_barrier(const Trajectory& traj, const Eigen::VectorXd& center, double R0, int d) {
  BarrierReport report;
  report.inequality = "min_i |x_i - c| >= sqrt(R0^2 - 2 d t); r(t)^2 >= r(0)^2 - 2 d int c";
  if (traj.snapshots.empty()) return report;
  const double tolerance = 10.0 * traj.config.tau;
  const double r0_squared = squared_radii(traj.snapshots.front().varifold, center).minCoeff();
  if (r0_squared < R0 * R0 * (1.0 - 1e-14)) {
    throw InvalidArgument("external barrier: initial cloud meets B(c, R0)");
  }
  double integral = 0.0;
  double previous_c = 0.0;
  double previous_time = 0.0;
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    const auto& snap = traj.snapshots[k];
    const Eigen::VectorXd r2 = squared_radii(snap.varifold, center);
    BarrierStep s = blank_step(snap, r2);
    const auto c_opt = try_barrier_constant(snap.varifold, center, traj.config.epsilon, traj.config.op);
    const double c = c_opt ? *c_opt : 0.0;
    if (k > 0) integral += std::max(previous_c, c) * (snap.time - previous_time);
    previous_c = c;
    previous_time = snap.time;
    if (r2.size() == 0) {
      report.steps.push_back(s);
      continue;
    }
    const double remaining = R0 * R0 - 2.0 * d * snap.time;
    if (remaining > 0.0) {
      s.bound = std::sqrt(remaining);
      s.slack = s.r_min - s.bound;
      s.pass = s.slack >= -tolerance;
    }
    const double running = r0_squared - 2.0 * d * integral;
    if (running > 0.0) {
      s.secondary_bound = std::sqrt(running);
      s.secondary_slack = s.r_min - s.secondary_bound;
      s.pass = s.pass && s.secondary_slack >= -tolerance;
    }
    report.steps.push_back(s);
  }
  finish(report);
  return report;
}

BarrierReport check_weak_external_discrete(const Trajectory& traj, const Eigen::VectorXd& center, int d,
                                           double tau) {
  BarrierReport report;
  report.inequality = "|x_p^k - c|^2 <= |x_p^{k+1} - c|^2 + 2 d tau";
  const double allowance = 2.0 * d * tau;
  for (std::size_t k = 0; k + 1 < traj.snapshots.size(); ++k) {
    const auto& a = traj.snapshots[k];
    const auto& b = traj.snapshots[k + 1];
    if (std::abs((b.time - a.time) - tau) > 1e-9 * std::max(tau, 1e-300)) {
      throw InvalidArgument("weak external barrier: snapshots must be one step of size tau apart");
    }
    const Eigen::VectorXd ra = squared_radii(a.varifold, center);
    const Eigen::VectorXd rb = squared_radii(b.varifold, center);
    BarrierStep s = blank_step(a, ra);
    if (ra.size() == 0) {
      report.steps.push_back(s);
      continue;
    }
    const std::size_t p = argmin(ra);
    const auto ip = static_cast<Eigen::Index>(p);
    s.bound = rb[ip] + allowance;
    s.slack = s.bound - ra[ip];
    s.pass = s.slack >= -kBarrierTolerance;
    if (argmin(rb) == p) {
      s.secondary_bound = ra[ip] - allowance;
      s.secondary_slack = rb[ip] - s.secondary_bound;
      s.pass = s.pass && s.secondary_slack >= -kBarrierTolerance;
    }
    report.steps.push_back(s);
  }
  finish(report);
  return report;
}

void write_barrier_csv(std::ostream& out, const BarrierReport& report) {
  out << "step,time,r_min,r_max,bound,slack,secondary_bound,secondary_slack,pass\n";
  for (const auto& s : report.steps) {
    out << s.step << ',' << format_double(s.time) << ',' << format_double(s.r_min) << ',' << format_double(s.r_max)
        << ',' << format_double(s.bound) << ',' << format_double(s.slack) << ',' << format_double(s.secondary_bound)
        << ',' << format_double(s.secondary_slack) << ',' << (s.pass ? 1 : 0) << '\n';
  }
}

bool is_null_spec(const OperatorSpec& spec) {
  if (spec.terms.empty()) return false;
  return std::all_of(spec.terms.begin(), spec.terms.end(), [](const OperatorTerm& t) {
    if (!t.right) return t.left == Atom::T;
    return (t.left == Atom::T && (*t.right == Atom::S || *t.right == Atom::Sperp)) ||
           (t.left == Atom::S && *t.right == Atom::Tperp);
  });
}

ConvergenceOptions default_convergence_options(ShapeKind kind) {
  ConvergenceOptions o;
  o.shape.kind = kind;
  o.specs = {"S", "-2*Sperp", "2*Id", "Tperp.S", "-2*Tperp.Sperp", "2*Tperp", "2*Sperp.Tperp",
             "S.T", "-1*Sperp.T", "T", "T.S", "S.Tperp", "T.Sperp"};
  o.epsilons = {0.4, 0.2, 0.1, 0.05};
  o.n_exponent = 3.0;
  switch (kind) {
    case ShapeKind::Circle:
      o.shape.n = 2;
      o.shape.jitter = 1.0;
      o.n_coefficient = 8.0;
      o.estimate_tangents = true;
      break;
    case ShapeKind::Sphere:
      o.shape.n = 3;
      o.n_coefficient = 1.5;
      o.n_exponent = 4.5;
      o.estimate_tangents = true;
      break;
    case ShapeKind::Torus:
      o.shape.n = 3;
      o.shape.radius = 2.0;
      o.shape.minor_radius = 0.5;
      o.n_coefficient = 8.0;
      o.n_exponent = 4.0;
      o.estimate_tangents = true;
      break;
    case ShapeKind::Segment:
      o.shape.n = 2;
      o.shape.length = 2.0;
      o.n_coefficient = 40.0;
      o.n_exponent = 1.0;
      break;
    case ShapeKind::Plane:
      o.shape.n = 3;
      o.shape.length = 2.0;
      o.n_coefficient = 40.0;
      o.n_exponent = 2.0;
      break;
  }
  return o;
}

namespace {

// Points whose ball of radius `margin` stays on a bounded shape.
bool interior(const ShapeSampler& s, const Eigen::VectorXd& x, double margin) {
  const Eigen::VectorXd y = s.center.size() == 0 ? x : Eigen::VectorXd(x - s.center);
  switch (s.kind) {
    case ShapeKind::Segment: return y[0] >= margin && y[0] <= s.length - margin;
    case ShapeKind::Plane:
      return y[0] >= margin && y[0] <= s.length - margin && y[1] >= margin && y[1] <= s.length - margin;
    default: return true;
  }
}

double fit_slope(const std::vector<double>& eps, const std::vector<double>& err) {
  if (eps.size() < 2) return kNaN;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < eps.size(); ++k) {
    if (!(err[k] > 0.0)) return kNaN;
    const double x = std::log(eps[k]);
    const double y = std::log(err[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = static_cast<double>(eps.size());
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace

std::vector<ConvergenceRow> convergence_study(const ConvergenceOptions& options) {
  if (options.epsilons.empty()) throw InvalidArgument("convergence study: no epsilons");
  for (std::size_t k = 0; k < options.epsilons.size(); ++k) {
    if (!(options.epsilons[k] > 0.0)) throw InvalidArgument("convergence study: epsilons must be positive");
    if (k > 0 && !(options.epsilons[k] < options.epsilons[k - 1])) {
      throw InvalidArgument("convergence study: epsilons must be strictly decreasing");
    }
  }
  if (!(options.n_coefficient > 0.0)) throw InvalidArgument("convergence study: N rule coefficient must be positive");
  if (options.probes < 1) throw InvalidArgument("convergence study: need at least one probe");
  if (options.shape.noise != 0.0) throw InvalidArgument("convergence study: samples must lie on the shape");

  std::vector<OperatorSpec> specs;
  for (const auto& s : options.specs) specs.push_back(parse_operator(s));

  SplitMix64 rng(options.probe_seed);
  std::vector<double> probe_u(static_cast<std::size_t>(options.probes));
  for (double& u : probe_u) u = rng.uniform();

  const double margin = options.epsilons.front();
  std::vector<std::vector<double>> errors(specs.size(), std::vector<double>(options.epsilons.size(), 0.0));
  std::vector<std::size_t> counts(options.epsilons.size());
  for (std::size_t e = 0; e < options.epsilons.size(); ++e) {
    const double eps = options.epsilons[e];
    ShapeSampler shape = options.shape;
    shape.count = static_cast<std::size_t>(std::ceil(options.n_coefficient * std::pow(eps, -options.n_exponent)));
    PointCloudVarifold v = sample_shape(shape);
    counts[e] = v.size();

    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (interior(shape, v.points.col(static_cast<Eigen::Index>(i)), margin)) candidates.push_back(i);
    }
    if (candidates.empty()) throw InvalidArgument("convergence study: no interior probe points");

    std::vector<std::size_t> probes;
    for (double u : probe_u) {
      probes.push_back(candidates[std::min(candidates.size() - 1,
                                           static_cast<std::size_t>(u * static_cast<double>(candidates.size())))]);
    }
    if (options.estimate_tangents) {
      // Only the probes' eps-balls enter the estimates.
      const SpatialIndex index(v.points, eps);
      std::vector<std::size_t> needed;
      for (std::size_t i : probes) {
        const auto ball = index.query_closed(v.points.col(static_cast<Eigen::Index>(i)).data(), eps);
        needed.insert(needed.end(), ball.begin(), ball.end());
      }
      std::sort(needed.begin(), needed.end());
      needed.erase(std::unique(needed.begin(), needed.end()), needed.end());
      const std::size_t kept = refresh_tangents_pca(v.points, v.masses, options.tangent_factor * eps, v.d, v.tangents, &needed);
      if (kept > 0) throw InvalidArgument("convergence study: too few neighbors for tangent estimation");
    }
    const CurvatureEstimator est(v, default_bump_pair(v.n), eps);
    for (std::size_t i : probes) {
      const Eigen::VectorXd x = v.points.col(static_cast<Eigen::Index>(i));
      const Eigen::VectorXd exact = analytic_mean_curvature(shape, x);
      const auto hood = est.neighborhood(i, options.tangential);
      for (std::size_t s = 0; s < specs.size(); ++s) {
        const Eigen::VectorXd H = est.evaluate(hood, specs[s]);
        const double err = is_null_spec(specs[s]) ? H.norm() : (H - exact).norm();
        errors[s][e] = std::max(errors[s][e], err);
      }
    }
  }

  std::vector<ConvergenceRow> rows;
  for (std::size_t s = 0; s < specs.size(); ++s) {
    const double slope = fit_slope(options.epsilons, errors[s]);
    for (std::size_t e = 0; e < options.epsilons.size(); ++e) {
      rows.push_back({options.specs[s], options.epsilons[e], counts[e], errors[s][e], slope});
    }
  }
  return rows;
}

void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows) {
  out << "spec,epsilon,N,max_error,slope\n";
  for (const auto& r : rows) {
    out << '"' << r.spec << "\"," << format_double(r.epsilon) << ',' << r.count << ',' << format_double(r.max_error)
        << ',' << format_double(r.slope) << '\n';
  }
}

}  // namespace varic
