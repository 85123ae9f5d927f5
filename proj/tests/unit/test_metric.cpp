#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "lmcf/graph_geometry.hpp"
#include "lmcf/metric.hpp"
#include "support/geometry_oracle.hpp"

namespace lmcf {
namespace {

struct CatalogPoint {
  Metric metric;
  Vec2 x;
};

std::vector<CatalogPoint> catalog_points() {
  return {
      {{MetricKind::flat, 1.0}, {0.3, -0.7}},
      {{MetricKind::flat_polar, 1.0}, {2.0, 0.4}},
      {{MetricKind::flat_polar, 1.0}, {0.5, 2.9}},
      {{MetricKind::sphere, 1.0}, {1.1, 0.3}},
      {{MetricKind::sphere, 1.0}, {0.4, -2.0}},
      {{MetricKind::rotational, 0.8}, {0.9, 1.2}},
      {{MetricKind::rotational, 2.0}, {0.3, 0.0}},
      {{MetricKind::sphere_cap, 1.0}, {0.2, -0.35}},
      {{MetricKind::sphere_cap, 1.0}, {-0.6, 0.1}},
  };
}

Christoffel christoffel_oracle(const Metric& m, const Vec2& x) { return oracle::christoffel(m, x); }
double curvature_oracle(const Metric& m, const Vec2& x) { return oracle::gauss_curvature(m, x); }

TEST(Metric, PolarCatalogValuesAtRadiusTwo) {
  const MetricSample m = metric_at({MetricKind::flat_polar, 1.0}, Vec2(2.0, 0.7));
  EXPECT_DOUBLE_EQ(m.sigma(1, 1), 4.0);
  EXPECT_DOUBLE_EQ(m.christoffel[0](1, 1), -2.0);
  EXPECT_DOUBLE_EQ(m.christoffel[1](0, 1), 0.5);
  EXPECT_DOUBLE_EQ(m.christoffel[1](1, 0), 0.5);
  EXPECT_DOUBLE_EQ(m.gauss_curvature, 0.0);
}

TEST(Metric, SphereHasUnitCurvature) {
  for (double th : {0.3, 1.0, 2.5}) {
    EXPECT_NEAR(metric_at({MetricKind::sphere, 1.0}, Vec2(th, 0.1)).gauss_curvature, 1.0, 1e-14);
  }
  EXPECT_DOUBLE_EQ(metric_at({MetricKind::sphere_cap, 1.0}, Vec2(0.4, 0.2)).gauss_curvature, 1.0);
}

TEST(Metric, RotationalCurvatureIsPositiveAndDecays) {
  const Metric m{MetricKind::rotational, 1.5};
  double prev = std::numeric_limits<double>::infinity();
  for (double r : {0.1, 0.5, 1.0, 2.0}) {
    const double k = metric_at(m, Vec2(r, 0)).gauss_curvature;
    EXPECT_GT(k, 0.0);
    EXPECT_LT(k, prev);
    const double sech = 1.0 / std::cosh(1.5 * r);
    EXPECT_NEAR(k, 2 * 1.5 * 1.5 * sech * sech, 1e-12);
    prev = k;
  }
}

TEST(Metric, InverseIsExact) {
  for (const auto& p : catalog_points()) {
    const MetricSample m = metric_at(p.metric, p.x);
    EXPECT_LT((m.sigma_inv * m.sigma - Mat2::Identity()).cwiseAbs().maxCoeff(), 1e-12) << to_string(p.metric.kind);
    EXPECT_GT(m.sigma.determinant(), 0.0);
  }
}

TEST(Metric, ChristoffelMatchesFiniteDifferenceOracle) {
  for (const auto& p : catalog_points()) {
    const MetricSample m = metric_at(p.metric, p.x);
    const Christoffel o = christoffel_oracle(p.metric, p.x);
    for (int k = 0; k < 2; ++k) {
      EXPECT_LT((m.christoffel[k] - o[k]).cwiseAbs().maxCoeff(), 1e-8) << to_string(p.metric.kind) << " k=" << k;
      EXPECT_LT((m.christoffel[k] - m.christoffel[k].transpose()).cwiseAbs().maxCoeff(), 1e-15);
    }
  }
}

TEST(Metric, GaussCurvatureMatchesFiniteDifferenceOracle) {
  for (const auto& p : catalog_points()) {
    EXPECT_NEAR(metric_at(p.metric, p.x).gauss_curvature, curvature_oracle(p.metric, p.x), 1e-8)
        << to_string(p.metric.kind);
  }
}

TEST(Metric, RiemannTensorSymmetries) {
  const MetricSample m = metric_at({MetricKind::sphere_cap, 1.0}, Vec2(0.3, 0.1));
  EXPECT_NEAR(m.riemann(0, 1, 0, 1), m.gauss_curvature * m.sigma.determinant(), 1e-14);
  EXPECT_DOUBLE_EQ(m.riemann(0, 1, 0, 1), -m.riemann(1, 0, 0, 1));
  EXPECT_DOUBLE_EQ(m.riemann(0, 0, 1, 1), 0.0);
}

TEST(Metric, ChartErrors) {
  EXPECT_THROW(metric_at({MetricKind::sphere, 1.0}, Vec2(0.0, 0.0)), ChartError);
  EXPECT_THROW(metric_at({MetricKind::sphere, 1.0}, Vec2(std::numbers::pi, 0.0)), ChartError);
  EXPECT_THROW(metric_at({MetricKind::flat_polar, 1.0}, Vec2(-0.1, 0.0)), ChartError);
  EXPECT_THROW(metric_at({MetricKind::rotational, -1.0}, Vec2(0.5, 0.0)), ScenarioError);
  EXPECT_THROW(metric_kind_from_string("hyperbolic"), ScenarioError);
  EXPECT_EQ(metric_kind_from_string("sphere_cap"), MetricKind::sphere_cap);
}

// --- covariant Hessian --------------------------------------------------------

using oracle::patch;

TEST(CovariantHessian, FlatProductField) {
  const auto f = [](const Vec2& x) { return x[0] * x[1]; };
  const Mat2 h = covariant_hessian(patch(f, Vec2(0.4, -1.3), 0.1), metric_at({}, Vec2(0.4, -1.3)));
  EXPECT_NEAR(h(0, 0), 0.0, 1e-12);
  EXPECT_NEAR(h(1, 1), 0.0, 1e-12);
  EXPECT_NEAR(h(0, 1), 1.0, 1e-12);
  EXPECT_NEAR(h(1, 0), 1.0, 1e-12);
}

TEST(CovariantHessian, PolarRadiusField) {
  // u = r in polar coordinates: D^2 u = r dtheta^2.
  const Vec2 x(1.7, 0.2);
  const auto f = [](const Vec2& p) { return p[0]; };
  const Mat2 h = covariant_hessian(patch(f, x, 0.05), metric_at({MetricKind::flat_polar, 1.0}, x));
  EXPECT_NEAR(h(0, 0), 0.0, 1e-12);
  EXPECT_NEAR(h(0, 1), 0.0, 1e-12);
  EXPECT_NEAR(h(1, 1), 1.7, 1e-12);
}

using oracle::sphere_field_exact;

TEST(CovariantHessian, SecondOrderConvergenceOnSphere) {
  const Metric sphere{MetricKind::sphere, 1.0};
  const Vec2 x(0.9, 0.6);
  const MetricSample m = metric_at(sphere, x);
  const Mat2 exact = covariant_hessian(sphere_field_exact(x), m);
  const auto f = [](const Vec2& p) { return std::sin(p[0]) * std::cos(p[1]) + p[0] * p[0]; };
  const double e1 = (covariant_hessian(patch(f, x, 0.04), m) - exact).cwiseAbs().maxCoeff();
  const double e2 = (covariant_hessian(patch(f, x, 0.02), m) - exact).cwiseAbs().maxCoeff();
  EXPECT_LT(e2, 1e-3);
  EXPECT_GE(e1 / e2, 3.6);
  EXPECT_LE(e1 / e2, 4.4);
}

TEST(CovariantHessian, IsSymmetric) {
  const Metric cap{MetricKind::sphere_cap, 1.0};
  const Vec2 x(0.1, 0.2);
  const auto f = [](const Vec2& p) { return 0.3 * p[0] * p[0] * p[1] + std::sin(p[1]); };
  const Mat2 h = covariant_hessian(patch(f, x, 0.01), metric_at(cap, x));
  EXPECT_DOUBLE_EQ(h(0, 1), h(1, 0));
}

}  // namespace
}  // namespace lmcf
