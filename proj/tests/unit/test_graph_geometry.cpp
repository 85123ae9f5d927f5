#include <cmath>
#include <functional>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "lmcf/graph_geometry.hpp"

namespace lmcf {
namespace {

const EvoDuConvention& convention(std::string_view name) {
  for (const auto& c : kEvoDuConventions) {
    if (c.name == name) return c;
  }
  throw std::runtime_error("no convention " + std::string(name));
}

TEST(GraphGeometry, FlatGradientExample) {
  const GraphGeometry g = graph_geometry(Vec2(0.6, 0.0), Mat2::Zero(), metric_at({}, Vec2::Zero()));
  EXPECT_NEAR(g.du2, 0.36, 1e-15);
  EXPECT_NEAR(g.v, 0.8, 1e-15);
  EXPECT_NEAR(g.g_upper(0, 0), 1.5625, 1e-14);
  EXPECT_NEAR(g.g_upper(1, 1), 1.0, 1e-15);
  EXPECT_NEAR(g.g_lower(0, 0), 0.64, 1e-15);
  EXPECT_NEAR(g.H, 0.0, 1e-15);
}

TEST(GraphGeometry, ConstantGraphIsMaximal) {
  const GraphGeometry g = graph_geometry(Vec2::Zero(), Mat2::Zero(), metric_at({MetricKind::sphere_cap, 1.0}, Vec2(0.2, 0.1)));
  EXPECT_EQ(g.v, 1.0);
  EXPECT_EQ(g.H, 0.0);
  EXPECT_EQ(g.flow_speed(), 0.0);
}

TEST(GraphGeometry, ParaboloidMeanCurvatureAtOrigin) {
  // u = |x|^2 / 8: D^2 u = I/4, Du = 0, H = tr = 1/2.
  LocalDerivatives d;
  d.second = 0.25 * Mat2::Identity();
  const GraphGeometry g = graph_geometry(d, metric_at({}, Vec2::Zero()));
  EXPECT_NEAR(g.H, 0.5, 1e-15);
}

TEST(GraphGeometry, LightConeGuardThrows) {
  const MetricSample m = metric_at({}, Vec2::Zero());
  EXPECT_THROW(graph_geometry(Vec2(1.0, 0.0), Mat2::Zero(), m), SpacelikeViolation);
  EXPECT_THROW(graph_geometry(Vec2(0.8, 0.7), Mat2::Zero(), m), SpacelikeViolation);
  try {
    graph_geometry(Vec2(0.0, 1.2), Mat2::Zero(), m);
    FAIL();
  } catch (const SpacelikeViolation& e) {
    EXPECT_NEAR(e.du2(), 1.44, 1e-12);
  }
}

TEST(GraphGeometry, InducedMetricInverseAndHvIdentity) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const std::vector<std::pair<Metric, Vec2>> points = {
      {{MetricKind::flat, 1.0}, {0.1, 0.2}},
      {{MetricKind::flat_polar, 1.0}, {1.3, 0.4}},
      {{MetricKind::sphere, 1.0}, {0.8, 1.0}},
      {{MetricKind::rotational, 1.2}, {0.7, -0.3}},
      {{MetricKind::sphere_cap, 1.0}, {0.3, -0.4}},
  };
  for (const auto& [metric, x] : points) {
    const MetricSample m = metric_at(metric, x);
    for (int trial = 0; trial < 50; ++trial) {
      Vec2 du(uni(rng), uni(rng));
      const double scale = std::sqrt(0.99 * std::abs(uni(rng)) / gradient_norm2(du, m));
      du *= scale;
      Mat2 hess;
      hess << uni(rng), uni(rng), 0, uni(rng);
      hess(1, 0) = hess(0, 1);
      const GraphGeometry g = graph_geometry(du, hess, m);
      EXPECT_LT((g.g_upper * g.g_lower - Mat2::Identity()).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_NEAR(g.H * g.v, g.flow_speed(), 1e-12 * (1 + std::abs(g.flow_speed())));
    }
  }
}

// --- symbolic oracles on a polynomial field in the sphere_cap chart ----------------

struct Poly {
  // u = a x + b y + c x^2 + d x y + e y^2 + f x^3 + g y^3
  double a = 0.15, b = -0.1, c = 0.2, d = -0.05, e = 0.1, f = 0.3, g = -0.2;
  LocalDerivatives at(const Vec2& p) const {
    const double x = p[0], y = p[1];
    LocalDerivatives out;
    out.grad << a + 2 * c * x + d * y + 3 * f * x * x, b + d * x + 2 * e * y + 3 * g * y * y;
    out.second << 2 * c + 6 * f * x, d, d, 2 * e + 6 * g * y;
    return out;
  }
};

double d1(const std::function<double(const Vec2&)>& f, const Vec2& x, int k, double h = 1e-3) {
  Vec2 e = Vec2::Zero();
  e[k] = h;
  return (-f(x + 2 * e) + 8 * f(x + e) - 8 * f(x - e) + f(x - 2 * e)) / (12 * h);
}

double d2(const std::function<double(const Vec2&)>& f, const Vec2& x, int k, int l, double h = 1e-3) {
  if (k == l) {
    Vec2 e = Vec2::Zero();
    e[k] = h;
    return (-f(x + 2 * e) + 16 * f(x + e) - 30 * f(x) + 16 * f(x - e) - f(x - 2 * e)) / (12 * h * h);
  }
  return d1([&](const Vec2& p) { return d1(f, p, k, h); }, x, l, h);
}

TEST(GraphGeometry, DivergenceFormOfMeanCurvature) {
  // v div_sigma(Du / v) = g^{ij} D_i D_j u, with div_sigma X = (1/sqrt|sigma|) d_i (sqrt|sigma| X^i).
  const Metric cap{MetricKind::sphere_cap, 1.0};
  const Poly u;
  for (const Vec2& x : {Vec2(0.1, 0.05), Vec2(-0.2, 0.15), Vec2(0.0, -0.1)}) {
    double div = 0.0;
    for (int i = 0; i < 2; ++i) {
      div += d1(
          [&](const Vec2& p) {
            const MetricSample m = metric_at(cap, p);
            const Vec2 grad = u.at(p).grad;
            const double v = std::sqrt(1 - gradient_norm2(grad, m));
            return std::sqrt(m.sigma.determinant()) * (m.sigma_inv * grad)[i] / v;
          },
          x, i);
    }
    const MetricSample m = metric_at(cap, x);
    const GraphGeometry g = graph_geometry(u.at(x), m);
    EXPECT_NEAR(g.v * div / std::sqrt(m.sigma.determinant()), g.flow_speed(), 1e-9);
  }
}

// Along u_t = g^{ij} D_i D_j u, d/dt |Du|^2 = 2 <Du, D u_t> pointwise; the oracle
// evaluates this directly and compares with each convention of the identity.
struct EvoOracle {
  double lhs;
  EvoDuInputs in;
  MetricSample m;
};

EvoOracle evo_oracle(const Metric& metric, const Poly& u, const Vec2& x) {
  const auto speed = [&](const Vec2& p) { return graph_geometry(u.at(p), metric_at(metric, p)).flow_speed(); };
  const auto w = [&](const Vec2& p) { return gradient_norm2(u.at(p).grad, metric_at(metric, p)); };
  EvoOracle o;
  o.m = metric_at(metric, x);
  const Vec2 grad = u.at(x).grad;
  const Vec2 dspeed(d1(speed, x, 0), d1(speed, x, 1));
  o.lhs = 2.0 * grad.dot(o.m.sigma_inv * dspeed);
  LocalDerivatives dw;
  dw.grad << d1(w, x, 0), d1(w, x, 1);
  dw.second << d2(w, x, 0, 0), d2(w, x, 0, 1), d2(w, x, 1, 0), d2(w, x, 1, 1);
  o.in = {grad, covariant_hessian(u.at(x), o.m), dw.grad, covariant_hessian(dw, o.m)};
  return o;
}

TEST(EvoDu, ConstantFieldHasZeroRightSide) {
  const MetricSample m = metric_at({MetricKind::sphere_cap, 1.0}, Vec2(0.2, 0.3));
  const EvoDuInputs in{Vec2::Zero(), Mat2::Zero(), Vec2::Zero(), Mat2::Zero()};
  for (const auto& c : kEvoDuConventions) EXPECT_EQ(evo_du_rhs(in, m, c), 0.0) << c.name;
}

TEST(EvoDu, CurvatureTermIsolated) {
  // Equal inputs on a flat and a K = 1 metric with the same sigma differ only by -c K w.
  const MetricSample flat = metric_at({}, Vec2::Zero());
  MetricSample curved = flat;
  curved.gauss_curvature = 1.0;
  const EvoDuInputs in{Vec2(0.3, 0.4), Mat2::Zero(), Vec2::Zero(), Mat2::Zero()};
  for (const auto& c : kEvoDuConventions) {
    EXPECT_NEAR(evo_du_rhs(in, curved, c) - evo_du_rhs(in, flat, c), -c.curvature_coef * 0.25, 1e-15) << c.name;
  }
}

TEST(EvoDu, RederivedConventionMatchesPointwiseOracle) {
  const Poly u;
  for (const auto& [metric, x] : std::vector<std::pair<Metric, Vec2>>{
           {{MetricKind::flat, 1.0}, {0.1, -0.2}},
           {{MetricKind::sphere_cap, 1.0}, {0.2, 0.1}},
           {{MetricKind::sphere_cap, 1.0}, {-0.15, 0.25}}}) {
    const EvoOracle o = evo_oracle(metric, u, x);
    EXPECT_NEAR(evo_du_rhs(o.in, o.m, convention("rederived")), o.lhs, 1e-6) << to_string(metric.kind);
  }
}

TEST(EvoDu, OtherConventionsMissTheOracle) {
  const Poly u;
  const EvoOracle o = evo_oracle({MetricKind::sphere_cap, 1.0}, u, Vec2(0.2, 0.1));
  for (const auto& c : kEvoDuConventions) {
    if (c.name == "rederived") continue;
    EXPECT_GT(std::abs(evo_du_rhs(o.in, o.m, c) - o.lhs), 1e-3) << c.name;
  }
}

TEST(EvoDu, GuardThrows) {
  const MetricSample m = metric_at({}, Vec2::Zero());
  const EvoDuInputs in{Vec2(1.0, 0.1), Mat2::Zero(), Vec2::Zero(), Mat2::Zero()};
  EXPECT_THROW(evo_du_rhs(in, m, kEvoDuConventions[0]), SpacelikeViolation);
}

}  // namespace
}  // namespace lmcf
