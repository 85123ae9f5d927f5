#pragma once

// Analytic catalog of ambient surface metrics (M^2, sigma) with closed-form
// Christoffel symbols and Gaussian curvature.

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "lmcf/errors.hpp"

namespace lmcf {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// christoffel[k](i, j) = Gamma^k_{ij}.
using Christoffel = std::array<Mat2, 2>;

enum class MetricKind {
  flat,        ///< Euclidean plane, cartesian chart.
  flat_polar,  ///< Euclidean plane, polar chart (r, theta).
  sphere,      ///< Unit sphere, spherical chart (colatitude, longitude).
  rotational,  ///< dr^2 + f(r)^2 dtheta^2 with f = tanh(a r)/a, K = 2a^2 sech^2(a r).
  sphere_cap,  ///< Unit sphere, stereographic chart 4|dx|^2/(1+|x|^2)^2.
};

struct Metric {
  MetricKind kind = MetricKind::flat;
  double param = 1.0;  // only used by `rotational`

  friend bool operator==(const Metric&, const Metric&) = default;
};

inline std::string_view to_string(MetricKind k) {
  switch (k) {
    case MetricKind::flat: return "flat";
    case MetricKind::flat_polar: return "flat_polar";
    case MetricKind::sphere: return "sphere";
    case MetricKind::rotational: return "rotational";
    case MetricKind::sphere_cap: return "sphere_cap";
  }
  return "?";
}

inline MetricKind metric_kind_from_string(std::string_view id) {
  for (auto k : {MetricKind::flat, MetricKind::flat_polar, MetricKind::sphere,
                 MetricKind::rotational, MetricKind::sphere_cap}) {
    if (to_string(k) == id) return k;
  }
  throw ScenarioError("unknown metric id '" + std::string(id) + "'");
}

/// sigma, its inverse, Gamma and K at one chart point.
struct MetricSample {
  Mat2 sigma;
  Mat2 sigma_inv;
  Christoffel christoffel;
  double gauss_curvature = 0.0;

  /// R_{limj} = K (sigma_lm sigma_ij - sigma_lj sigma_im); the only curvature tensor in 2-D.
  double riemann(int l, int i, int m, int j) const {
    return gauss_curvature *
           (sigma(l, m) * sigma(i, j) - sigma(l, j) * sigma(i, m));
  }

  double inner(const Vec2& a, const Vec2& b) const { return a.dot(sigma * b); }
  double norm(const Vec2& a) const { return std::sqrt(inner(a, a)); }
};

/// Whether `x` lies in the chart of `metric`.
inline bool in_chart(const Metric& metric, const Vec2& x) {
  switch (metric.kind) {
    case MetricKind::flat:
    case MetricKind::sphere_cap:
      return std::isfinite(x[0]) && std::isfinite(x[1]);
    case MetricKind::flat_polar:
    case MetricKind::rotational:
      return x[0] > 0.0 && std::isfinite(x[1]);
    case MetricKind::sphere:
      return x[0] > 0.0 && x[0] < std::numbers::pi && std::isfinite(x[1]);
  }
  return false;
}

namespace detail {

// sigma = diag(1, f(r)^2) on a polar-type chart.
inline MetricSample warped(double f, double fp, double fpp) {
  MetricSample m;
  m.sigma << 1.0, 0.0, 0.0, f * f;
  m.sigma_inv << 1.0, 0.0, 0.0, 1.0 / (f * f);
  m.christoffel[0].setZero();
  m.christoffel[1].setZero();
  m.christoffel[0](1, 1) = -f * fp;
  m.christoffel[1](0, 1) = fp / f;
  m.christoffel[1](1, 0) = fp / f;
  m.gauss_curvature = -fpp / f;
  return m;
}

// sigma = lambda^2 delta with lambda = 2/(1+|x|^2).
inline MetricSample stereographic(const Vec2& x) {
  const double q = 1.0 + x.squaredNorm();
  const double lambda = 2.0 / q;
  const Vec2 dlog = -2.0 * x / q;  // grad log(lambda)
  MetricSample m;
  m.sigma = lambda * lambda * Mat2::Identity();
  m.sigma_inv = Mat2::Identity() / (lambda * lambda);
  for (int k = 0; k < 2; ++k) {
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        m.christoffel[k](i, j) = (k == i ? dlog[j] : 0.0) + (k == j ? dlog[i] : 0.0) -
                                 (i == j ? dlog[k] : 0.0);
      }
    }
  }
  m.gauss_curvature = 1.0;
  return m;
}

}  // namespace detail

/// Sample the metric at chart point `x`. Throws ChartError outside the chart.
inline MetricSample metric_at(const Metric& metric, const Vec2& x) {
  if (!in_chart(metric, x)) {
    throw ChartError("point (" + std::to_string(x[0]) + ", " + std::to_string(x[1]) +
                     ") outside the chart of metric '" + std::string(to_string(metric.kind)) +
                     "'");
  }
  switch (metric.kind) {
    case MetricKind::flat: {
      MetricSample m;
      m.sigma.setIdentity();
      m.sigma_inv.setIdentity();
      m.christoffel[0].setZero();
      m.christoffel[1].setZero();
      return m;
    }
    case MetricKind::flat_polar:
      return detail::warped(x[0], 1.0, 0.0);
    case MetricKind::sphere:
      return detail::warped(std::sin(x[0]), std::cos(x[0]), -std::sin(x[0]));
    case MetricKind::rotational: {
      const double a = metric.param;
      if (!(a > 0.0)) throw ScenarioError("rotational metric needs a positive parameter");
      const double th = std::tanh(a * x[0]);
      const double sech2 = 1.0 - th * th;
      return detail::warped(th / a, sech2, -2.0 * a * th * sech2);
    }
    case MetricKind::sphere_cap:
      return detail::stereographic(x);
  }
  throw ScenarioError("unhandled metric kind");
}

}  // namespace lmcf
