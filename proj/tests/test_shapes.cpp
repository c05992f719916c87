#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "varic/error.hpp"
#include "varic/rng.hpp"
#include "varic/shapes.hpp"

using namespace varic;

TEST(Shapes, SplitMix64ReferenceSequence) {
  // Seed 1234567, computed with an independent implementation.
  SplitMix64 rng(1234567);
  const std::uint64_t expect[] = {6457827717110365317ULL, 3203168211198807973ULL, 9817491932198370423ULL,
                                  4593380528125082431ULL, 16408922859458223821ULL};
  for (std::uint64_t e : expect) EXPECT_EQ(rng.next(), e);
  SplitMix64 a(9), b(9);
  for (int k = 0; k < 100; ++k) {
    const double u = a.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_EQ(u, static_cast<double>(b.next() >> 11) * 0x1.0p-53);
  }
}

TEST(Shapes, CircleOfFour) {
  ShapeSampler s;
  s.count = 4;
  const PointCloudVarifold v = sample_shape(s);
  const double expect[4][2] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  for (int k = 0; k < 4; ++k) {
    EXPECT_NEAR(v.points(0, k), expect[k][0], 1e-15);
    EXPECT_NEAR(v.points(1, k), expect[k][1], 1e-15);
    EXPECT_LE((v.tangent(k) * v.points.col(k)).norm(), 1e-15);
    EXPECT_TRUE(is_projector(v.tangent(k), 1));
  }
  EXPECT_NEAR(v.masses.sum(), 2 * std::numbers::pi, 1e-14);
}

TEST(Shapes, SphereAndTorusLieOnShape) {
  ShapeSampler s;
  s.kind = ShapeKind::Sphere;
  s.n = 3;
  s.count = 100;
  PointCloudVarifold v = sample_shape(s);
  ASSERT_EQ(v.size(), 100u);
  EXPECT_EQ(v.d, 2);
  for (std::size_t i = 0; i < v.size(); ++i) {
    EXPECT_NEAR(v.points.col(i).norm(), 1.0, 1e-14);
    EXPECT_TRUE(is_projector(v.tangent(i), 2));
    EXPECT_LE((v.tangent(i) * v.points.col(i)).norm(), 1e-14);
  }

  s.kind = ShapeKind::Torus;
  s.n = 2;  // the torus always lives in R^3
  s.radius = 2.0;
  s.minor_radius = 0.5;
  s.count = 1000;
  v = sample_shape(s);
  EXPECT_EQ(v.n, 3);
  EXPECT_NEAR(static_cast<double>(v.size()), 1000.0, 100.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Eigen::Vector3d x = v.points.col(i);
    const double q = std::hypot(x[0], x[1]) - 2.0;
    EXPECT_NEAR(q * q + x[2] * x[2], 0.25, 1e-12);
    EXPECT_TRUE(is_projector(v.tangent(i), 2));
  }
  EXPECT_NEAR(v.masses.sum(), 4 * std::numbers::pi * std::numbers::pi * 2.0 * 0.5, 1e-10);
}

TEST(Shapes, HigherDimensionalSphere) {
  ShapeSampler s;
  s.kind = ShapeKind::Sphere;
  s.n = 5;
  s.count = 50;
  s.radius = 2.0;
  s.center = Eigen::VectorXd::Constant(5, 1.0);
  const PointCloudVarifold v = sample_shape(s);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Eigen::VectorXd y = v.points.col(i) - s.center;
    EXPECT_NEAR(y.norm(), 2.0, 1e-14);
    EXPECT_LE((analytic_mean_curvature(s, v.points.col(i)) + (4.0 / (2.0 * 2.0)) * y).norm(), 1e-13);
  }
}

TEST(Shapes, AnalyticCurvatureExamples) {
  ShapeSampler c;
  EXPECT_LE((analytic_mean_curvature(c, Eigen::Vector2d(1, 0)) - Eigen::Vector2d(-1, 0)).norm(), 1e-15);
  c.radius = 2.0;
  EXPECT_LE((analytic_mean_curvature(c, Eigen::Vector2d(0, 2)) - Eigen::Vector2d(0, -0.5)).norm(), 1e-15);
  EXPECT_THROW(analytic_mean_curvature(c, Eigen::Vector2d(0, 1)), InvalidArgument);

  ShapeSampler s;
  s.kind = ShapeKind::Sphere;
  s.n = 3;
  const Eigen::Vector3d H = analytic_mean_curvature(s, Eigen::Vector3d(0, 0, 1));
  EXPECT_LE((H - Eigen::Vector3d(0, 0, -2)).norm(), 1e-15);

  ShapeSampler p;
  p.kind = ShapeKind::Plane;
  p.n = 3;
  EXPECT_EQ(analytic_mean_curvature(p, Eigen::Vector3d(0.5, 0.5, 0)), Eigen::Vector3d::Zero());

  // Torus outer equator: principal curvatures 1/r and 1/(R + r).
  ShapeSampler t;
  t.kind = ShapeKind::Torus;
  t.n = 3;
  t.radius = 2.0;
  t.minor_radius = 0.5;
  const Eigen::Vector3d Ht = analytic_mean_curvature(t, Eigen::Vector3d(2.5, 0, 0));
  EXPECT_LE((Ht - Eigen::Vector3d(-(2.0 + 1.0 / 2.5), 0, 0)).norm(), 1e-14);
  const Eigen::Vector3d Hi = analytic_mean_curvature(t, Eigen::Vector3d(1.5, 0, 0));
  EXPECT_LE((Hi - Eigen::Vector3d(2.0 - 1.0 / 1.5, 0, 0)).norm(), 1e-14);
}

TEST(Shapes, AnalyticTangents) {
  ShapeSampler s;
  s.kind = ShapeKind::Sphere;
  s.n = 3;
  s.count = 200;
  const PointCloudVarifold v = sample_shape(s);
  for (std::size_t i = 0; i < v.size(); ++i) {
    EXPECT_LE((analytic_tangent(s, v.points.col(i)) - v.tangent(i)).norm(), 1e-14);
  }
  EXPECT_THROW(analytic_tangent(s, Eigen::Vector3d(0, 0, 0)), InvalidArgument);
}

TEST(Shapes, NoiseMovesAlongNormals) {
  ShapeSampler s;
  s.count = 500;
  s.noise = 0.01;
  s.seed = 3;
  const PointCloudVarifold v = sample_shape(s);
  double largest = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = distance_to_shape(s, v.points.col(i));
    EXPECT_LE(d, 0.01 + 1e-15);
    largest = std::max(largest, d);
    // Tangents stay those of the closest shape point.
    const Eigen::Vector2d y = v.points.col(i).normalized();
    EXPECT_LE((v.tangent(i) * y).norm(), 1e-14);
  }
  EXPECT_GT(largest, 0.009);

  s.noise = 0.0;
  const PointCloudVarifold clean = sample_shape(s);
  for (std::size_t i = 0; i < clean.size(); ++i) EXPECT_LE(distance_to_shape(s, clean.points.col(i)), 1e-14);
}

TEST(Shapes, SeededSamplingIsDeterministic) {
  ShapeSampler s;
  s.kind = ShapeKind::Circle;
  s.count = 100;
  s.jitter = 1.0;
  s.seed = 77;
  EXPECT_EQ(sample_shape(s).points, sample_shape(s).points);
  ShapeSampler t = s;
  t.seed = 78;
  EXPECT_NE(sample_shape(s).points, sample_shape(t).points);
}

TEST(Shapes, SegmentAndPlaneGrids) {
  ShapeSampler s;
  s.kind = ShapeKind::Segment;
  s.n = 3;
  s.count = 11;
  s.length = 1.0;
  PointCloudVarifold v = sample_shape(s);
  for (int k = 0; k < 11; ++k) EXPECT_NEAR(v.points(0, k), 0.1 * k, 1e-15);
  EXPECT_NEAR(v.masses.sum(), 1.0, 1e-15);

  s.kind = ShapeKind::Plane;
  s.count = 50;
  v = sample_shape(s);
  EXPECT_EQ(v.size(), 49u);
  EXPECT_EQ(v.d, 2);
}

TEST(Shapes, Errors) {
  ShapeSampler s;
  s.count = 0;
  EXPECT_THROW(sample_shape(s), InvalidArgument);
  s = ShapeSampler{};
  s.kind = ShapeKind::Torus;
  s.minor_radius = 1.5;
  EXPECT_THROW(sample_shape(s), InvalidArgument);
  s = ShapeSampler{};
  s.kind = ShapeKind::Plane;
  s.n = 2;
  EXPECT_THROW(sample_shape(s), InvalidArgument);
  s = ShapeSampler{};
  s.center = Eigen::VectorXd::Zero(3);
  EXPECT_THROW(sample_shape(s), InvalidArgument);
  EXPECT_THROW(parse_shape_kind("cube"), InvalidArgument);
  for (ShapeKind k : {ShapeKind::Circle, ShapeKind::Sphere, ShapeKind::Torus, ShapeKind::Segment, ShapeKind::Plane})
    EXPECT_EQ(parse_shape_kind(shape_name(k)), k);
}
