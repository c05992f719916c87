#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "oracle.hpp"
#include "varic/barriers.hpp"
#include "varic/error.hpp"

using namespace varic;

namespace {

PointCloudVarifold points2(std::initializer_list<std::pair<double, double>> xy) {
  PointCloudVarifold v(2, 1, xy.size());
  Eigen::Index k = 0;
  for (auto [x, y] : xy) {
    v.points(0, k) = x;
    v.points(1, k) = y;
    ++k;
  }
  v.set_all_tangents(Eigen::Vector2d(0, 1) * Eigen::RowVector2d(0, 1));
  return v;
}

PointCloudVarifold circle(std::size_t count, double radius, double jitter = 0.0, std::uint64_t seed = 0) {
  ShapeSampler s;
  s.count = count;
  s.radius = radius;
  s.jitter = jitter;
  s.seed = seed;
  return sample_shape(s);
}

// Snapshots of a circle with prescribed radii at t_k = k tau.
Trajectory scripted(const std::vector<double>& radii, double tau, std::size_t count = 40) {
  Trajectory t;
  t.config.tau = tau;
  t.config.epsilon = 0.5;
  for (std::size_t k = 0; k < radii.size(); ++k) t.snapshots.push_back({k, k * tau, circle(count, radii[k])});
  return t;
}

const Eigen::VectorXd kOrigin = Eigen::VectorXd::Zero(2);

}  // namespace

TEST(Barriers, ConstantExamples) {
  const OperatorSpec two_id = parse_operator("2*Id");
  EXPECT_DOUBLE_EQ(barrier_constant(points2({{1, 0}, {2, 0}}), kOrigin, 1.5, two_id), -2.0);
  EXPECT_NEAR(barrier_constant(points2({{1, 0}, {1, 0.1}}), kOrigin, 1.5, two_id), 0.0, 1e-15);
  // Ties in the argmin all count: both points are closest here and both give 1.
  EXPECT_NEAR(barrier_constant(points2({{1, 0}, {0.5, std::sqrt(0.75)}}), kOrigin, 1.5, two_id), 1.0, 1e-12);

  EXPECT_FALSE(try_barrier_constant(points2({{1, 0}, {5, 0}}), kOrigin, 1.0, two_id));
  EXPECT_THROW(barrier_constant(points2({{1, 0}, {5, 0}}), kOrigin, 1.0, two_id), InvalidArgument);
  // Neighbors at exactly eps are excluded.
  EXPECT_FALSE(try_barrier_constant(points2({{1, 0}, {2, 0}}), kOrigin, 1.0, two_id));
}

TEST(Barriers, TwoIdConstantNeverExceedsOne) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> count(2, 30);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = 2 + trial % 3;
    const PointCloudVarifold v = oracle::random_cloud(n, 1, static_cast<std::size_t>(count(rng)), rng);
    Eigen::VectorXd center(n);
    for (int c = 0; c < n; ++c) center[c] = std::uniform_real_distribution<double>(-2, 2)(rng);
    const auto c = try_barrier_constant(v, center, 1.5, parse_operator("2*Id"));
    if (c) {
      EXPECT_LE(*c, 1.0 + 1e-12);
    }
  }
}

TEST(Barriers, InternalPassesForImplicitFlow) {
  const PointCloudVarifold v = circle(60, 0.95, 0.5, 2);
  FlowConfig c;
  c.epsilon = 0.4;
  c.tau = 1e-3;
  c.steps = 50;
  c.implicit_weights = true;
  const Trajectory t = run_flow(v, default_bump_pair(2), c);
  const BarrierReport r = check_internal_barrier(t, kOrigin, 1.0, 1);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.first_failure(), r.steps.size());
  EXPECT_EQ(r.steps.size(), t.snapshots.size());
}

TEST(Barriers, InternalFailsForStationaryCloud) {
  const std::vector<double> radii(60, 0.9);
  const BarrierReport r = check_internal_barrier(scripted(radii, 1e-2), kOrigin, 1.0, 1);
  EXPECT_FALSE(r.pass);
  // sqrt(1 - 2 t) < 0.9 once t > 0.095.
  EXPECT_EQ(r.first_failure(), 10u);
  for (std::size_t k = 0; k < 10; ++k) EXPECT_TRUE(r.steps[k].pass);
  // Steps past t = 1/2 have no bound.
  EXPECT_TRUE(std::isnan(r.steps[55].bound));
  EXPECT_TRUE(r.steps[55].pass);
}

TEST(Barriers, InternalEqualityCase) {
  std::vector<double> radii;
  for (int k = 0; k < 40; ++k) radii.push_back(std::sqrt(1.0 - 2.0 * k * 1e-2));
  const BarrierReport r = check_internal_barrier(scripted(radii, 1e-2), kOrigin, 1.0, 1);
  EXPECT_TRUE(r.pass);
  for (const auto& s : r.steps) EXPECT_NEAR(s.slack, 0.0, 1e-14);
  EXPECT_THROW(check_internal_barrier(scripted({1.1}, 1e-2), kOrigin, 1.0, 1), InvalidArgument);
}

TEST(Barriers, ExternalPassesForContinuousFlow) {
  const PointCloudVarifold v = circle(100, 1.5);
  FlowConfig c;
  c.scheme = Scheme::ContinuousRk4;
  c.epsilon = 0.4;
  c.tau = 1e-3;
  c.steps = 200;
  const Trajectory t = run_flow(v, default_bump_pair(2), c, 10);
  const BarrierReport r = check_external_barrier(t, kOrigin, 1.0, 1);
  EXPECT_TRUE(r.pass);
  for (const auto& s : r.steps) {
    EXPECT_FALSE(std::isnan(s.bound));
    EXPECT_FALSE(std::isnan(s.secondary_bound));
  }
  EXPECT_THROW(check_external_barrier(t, kOrigin, 1.6, 1), InvalidArgument);
}

TEST(Barriers, ExternalDetectsInjectedViolation) {
  const double tau = 1e-3;
  std::vector<double> radii;
  for (int k = 0; k < 30; ++k) radii.push_back(std::sqrt(1.0 - 2.0 * k * tau));
  radii[17] -= 10.0 * 10.0 * tau;  // 10x the integration tolerance
  const BarrierReport r = check_external_barrier(scripted(radii, tau), kOrigin, 1.0, 1);
  EXPECT_FALSE(r.pass);
  EXPECT_EQ(r.first_failure(), 17u);
  for (std::size_t k = 18; k < r.steps.size(); ++k) EXPECT_TRUE(r.steps[k].pass);
}

TEST(Barriers, ExternalRunningBoundWithUnitConstant) {
  // Two points with barrier constant 1 at every scale: the running bound
  // reduces to r(0)^2 - 2 d t.
  Trajectory t;
  t.config.tau = 1e-2;
  t.config.epsilon = 2.0;
  for (int k = 0; k < 20; ++k) {
    const double s = std::sqrt(1.0 - 2.0 * k * 1e-2);
    t.snapshots.push_back({static_cast<std::size_t>(k), k * 1e-2, points2({{s, 0}, {0.5 * s, std::sqrt(0.75) * s}})});
  }
  ASSERT_NEAR(barrier_constant(t.snapshots[5].varifold, kOrigin, 2.0, parse_operator("2*Id")), 1.0, 1e-12);
  const BarrierReport r = check_external_barrier(t, kOrigin, 1.0, 1);
  EXPECT_TRUE(r.pass);
  for (const auto& s : r.steps) {
    EXPECT_NEAR(s.secondary_bound, std::sqrt(1.0 - 2.0 * s.time), 1e-12);
    EXPECT_NEAR(s.secondary_bound, s.bound, 1e-12);
  }
}

TEST(Barriers, WeakExternalExplicitRuns) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    const PointCloudVarifold v = oracle::random_cloud(2, 1, 30, rng, 1.0);
    FlowConfig c;
    c.scheme = Scheme::Explicit;
    c.epsilon = 0.5;
    c.tau = 1e-4;
    c.steps = 30;
    c.tangent_policy = TangentPolicy::Frozen;
    const Trajectory t = run_flow(v, default_bump_pair(2), c);
    Eigen::VectorXd z(2);
    z << std::uniform_real_distribution<double>(-1, 1)(rng), std::uniform_real_distribution<double>(-1, 1)(rng);
    const BarrierReport r = check_weak_external_discrete(t, z, 1, c.tau);
    EXPECT_TRUE(r.pass);
    EXPECT_EQ(r.steps.size(), c.steps);
  }
}

TEST(Barriers, WeakExternalStationaryPoint) {
  Trajectory t;
  t.config.tau = 1e-3;
  const PointCloudVarifold single = points2({{0.3, 0.4}});
  for (int k = 0; k < 3; ++k) t.snapshots.push_back({static_cast<std::size_t>(k), k * 1e-3, single});
  const BarrierReport r = check_weak_external_discrete(t, kOrigin, 1, 1e-3);
  ASSERT_EQ(r.steps.size(), 2u);
  for (const auto& s : r.steps) {
    EXPECT_DOUBLE_EQ(s.slack, 2e-3);
    EXPECT_DOUBLE_EQ(s.secondary_slack, 2e-3);
  }
  EXPECT_THROW(check_weak_external_discrete(t, kOrigin, 1, 2e-3), InvalidArgument);
}

TEST(Barriers, WeakExternalDetectsJump) {
  // The closest point moves inward by more than 2 d tau allows.
  Trajectory t;
  t.config.tau = 1e-3;
  t.snapshots.push_back({0, 0.0, points2({{1.0, 0}, {2.0, 0}})});
  t.snapshots.push_back({1, 1e-3, points2({{0.9, 0}, {2.0, 0}})});
  const BarrierReport r = check_weak_external_discrete(t, kOrigin, 1, 1e-3);
  EXPECT_FALSE(r.pass);
  EXPECT_NEAR(r.steps[0].slack, 0.81 + 2e-3 - 1.0, 1e-15);
}

TEST(Barriers, CsvReport) {
  std::vector<double> radii{0.9, 0.9};
  const BarrierReport r = check_internal_barrier(scripted(radii, 1e-2), kOrigin, 1.0, 1);
  std::ostringstream out;
  write_barrier_csv(out, r);
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "step,time,r_min,r_max,bound,slack,secondary_bound,secondary_slack,pass");
  EXPECT_NE(text.find("nan"), std::string::npos);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
}

TEST(Barriers, NullSpecs) {
  for (const char* s : {"T", "T.S", "S.Tperp", "T.Sperp", "T + 2*T.S"}) EXPECT_TRUE(is_null_spec(parse_operator(s))) << s;
  for (const char* s : {"S", "2*Id", "S.T", "Tperp.S", "T + S", "-1*Sperp.T"}) EXPECT_FALSE(is_null_spec(parse_operator(s))) << s;
}

TEST(Barriers, ConvergenceCircleDefaults) {
  ConvergenceOptions o = default_convergence_options(ShapeKind::Circle);
  o.specs = {"2*Id", "T", "S", "Tperp.S"};
  const auto rows = convergence_study(o);
  ASSERT_EQ(rows.size(), 16u);
  for (std::size_t s = 0; s < 4; ++s) {
    for (std::size_t k = 1; k < 4; ++k) EXPECT_LT(rows[4 * s + k].max_error, rows[4 * s + k - 1].max_error) << rows[4 * s].spec;
    EXPECT_GT(rows[4 * s].slope, 0.0);
  }
  EXPECT_LE(rows[3].max_error, 0.05);
  EXPECT_LE(rows[7].max_error, 0.1 * rows[4].max_error);
  EXPECT_EQ(rows[0].count, static_cast<std::size_t>(std::ceil(8.0 * std::pow(0.4, -3.0))));
}

TEST(Barriers, ConvergenceFlatShapesAreExact) {
  for (ShapeKind kind : {ShapeKind::Segment, ShapeKind::Plane}) {
    ConvergenceOptions o = default_convergence_options(kind);
    o.specs = {"S", "-2*Sperp", "2*Id", "Tperp.S", "-2*Tperp.Sperp", "2*Tperp", "2*Sperp.Tperp", "S.T", "-1*Sperp.T"};
    for (const auto& row : convergence_study(o)) EXPECT_LE(row.max_error, 1e-10) << shape_name(kind) << " " << row.spec;
  }
}

TEST(Barriers, ConvergenceTorus) {
  ConvergenceOptions o = default_convergence_options(ShapeKind::Torus);
  o.specs = {"2*Id", "S"};
  o.epsilons = {0.4, 0.2, 0.1};
  const auto rows = convergence_study(o);
  for (std::size_t s = 0; s < 2; ++s)
    for (std::size_t k = 1; k < 3; ++k) EXPECT_LT(rows[3 * s + k].max_error, rows[3 * s + k - 1].max_error);
}

TEST(Barriers, ConvergenceOptionsValidated) {
  ConvergenceOptions o = default_convergence_options(ShapeKind::Circle);
  o.epsilons = {0.1, 0.2};
  EXPECT_THROW(convergence_study(o), InvalidArgument);
  o = default_convergence_options(ShapeKind::Circle);
  o.shape.noise = 0.01;
  EXPECT_THROW(convergence_study(o), InvalidArgument);
}

TEST(Barriers, ConvergenceCsv) {
  std::vector<ConvergenceRow> rows{{"2*Id", 0.4, 125, 0.5, 1.25}, {"S + T", 0.2, 1000, 0.25, 1.25}};
  std::ostringstream out;
  write_convergence_csv(out, rows);
  EXPECT_EQ(out.str(), "spec,epsilon,N,max_error,slope\n\"2*Id\",0.40000000000000002,125,0.5,1.25\n"
                       "\"S + T\",0.20000000000000001,1000,0.25,1.25\n");
}
