#pragma once

// Strictly convex, star-shaped domains in a metric chart, their boundary frame
// {N, T}, geodesic curvature, and the normal-geodesic collar around the boundary.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "lmcf/metric.hpp"

namespace lmcf {

enum class DomainKind { disk, ellipse, perturbed_disk };

/// Boundary is center + R(s) (cos s, sin s), s in [0, 2pi), counterclockwise.
struct DomainSpec {
  DomainKind kind = DomainKind::disk;
  double radius = 1.0;     ///< disk / perturbed_disk
  double a = 1.0;          ///< ellipse semi-axis along the first chart axis
  double b = 1.0;          ///< ellipse semi-axis along the second chart axis
  double amplitude = 0.0;  ///< perturbed_disk: R = radius (1 + amplitude cos(mode s))
  int mode = 2;
  Vec2 center = Vec2::Zero();
};

struct RadialProfile {
  double r, dr, ddr;  ///< R(s), R'(s), R''(s)
};

struct BoundaryFrame {
  Vec2 point;
  Vec2 tangent;  ///< T, sigma-unit, counterclockwise
  Vec2 normal;   ///< N, sigma-unit, inward
  double kappa;  ///< geodesic curvature, sigma(nabla_T T, N)
  double speed;  ///< |gamma'(s)|_sigma
};

/// Point of the boundary collar reached by the normal geodesic of length `r` from gamma(s).
struct CollarPoint {
  Vec2 x;
  Vec2 normal;   ///< geodesic velocity, extends N
  Vec2 tangent;  ///< sigma-unit, orthogonal to normal, extends T
};

class ConvexDomain {
public:
  ConvexDomain(DomainSpec spec, Metric metric) : spec_(spec), metric_(metric) { validate(); }

  const DomainSpec& spec() const { return spec_; }
  const Metric& metric() const { return metric_; }
  const Vec2& center() const { return spec_.center; }

  RadialProfile radial(double s) const {
    switch (spec_.kind) {
      case DomainKind::disk:
        return {spec_.radius, 0.0, 0.0};
      case DomainKind::ellipse: {
        const double a = spec_.a, b = spec_.b;
        const double c = std::cos(s), sn = std::sin(s);
        const double d = b * b * c * c + a * a * sn * sn;
        const double dd = (a * a - b * b) * std::sin(2.0 * s);
        const double ddd = 2.0 * (a * a - b * b) * std::cos(2.0 * s);
        const double r = a * b / std::sqrt(d);
        const double rp = -0.5 * a * b * std::pow(d, -1.5) * dd;
        const double rpp = a * b * (0.75 * std::pow(d, -2.5) * dd * dd - 0.5 * std::pow(d, -1.5) * ddd);
        return {r, rp, rpp};
      }
      case DomainKind::perturbed_disk: {
        const double r0 = spec_.radius, e = spec_.amplitude, m = spec_.mode;
        return {r0 * (1.0 + e * std::cos(m * s)), -r0 * e * m * std::sin(m * s),
                -r0 * e * m * m * std::cos(m * s)};
      }
    }
    return {0.0, 0.0, 0.0};
  }

  Vec2 gamma(double s) const { return spec_.center + radial(s).r * Vec2(std::cos(s), std::sin(s)); }

  Vec2 gamma_prime(double s) const {
    const auto p = radial(s);
    const Vec2 e(std::cos(s), std::sin(s)), ep(-std::sin(s), std::cos(s));
    return p.dr * e + p.r * ep;
  }

  Vec2 gamma_second(double s) const {
    const auto p = radial(s);
    const Vec2 e(std::cos(s), std::sin(s)), ep(-std::sin(s), std::cos(s));
    return (p.ddr - p.r) * e + 2.0 * p.dr * ep;
  }

  BoundaryFrame frame(double s) const {
    BoundaryFrame f;
    f.point = gamma(s);
    const MetricSample m = metric_at(metric_, f.point);
    const Vec2 d1 = gamma_prime(s);
    const Vec2 d2 = gamma_second(s);
    f.speed = m.norm(d1);
    f.tangent = d1 / f.speed;
    f.normal = left_normal(f.tangent, m);
    Vec2 accel = d2;
    for (int k = 0; k < 2; ++k) accel[k] += d1.dot(m.christoffel[k] * d1);
    f.kappa = m.inner(accel, f.normal) / (f.speed * f.speed);
    return f;
  }

  double kappa(double s) const { return frame(s).kappa; }
  double kappa0() const { return kappa0_; }
  double kappa_max() const { return kappa_max_; }
  /// min over s of R(s); the core radius of the grid mapping.
  double min_radius() const { return min_radius_; }
  /// Smallest sigma-length of a radial chart segment from the center to the boundary.
  double inradius() const { return inradius_; }
  double collar_depth() const { return std::min(0.2 * inradius_, 0.5 / kappa_max_); }

  /// sigma-length of the boundary.
  double perimeter(int samples = 512) const {
    double sum = 0.0;
    const double ds = 2.0 * std::numbers::pi / samples;
    for (int j = 0; j < samples; ++j) sum += metric_at(metric_, gamma(j * ds)).norm(gamma_prime(j * ds));
    return sum * ds;
  }

  /// Follows the normal geodesic from gamma(s); negative r walks outward.
  CollarPoint collar_point(double s, double r) const {
    const BoundaryFrame f = frame(s);
    Vec2 x = f.point;
    Vec2 vel = f.normal;
    const int steps = std::max(16, static_cast<int>(std::ceil(std::abs(r) / 2e-3)));
    const double h = r / steps;
    auto accel = [&](const Vec2& p, const Vec2& q) {
      const MetricSample m = metric_at(metric_, p);
      Vec2 a;
      for (int k = 0; k < 2; ++k) a[k] = -q.dot(m.christoffel[k] * q);
      return a;
    };
    for (int n = 0; n < steps; ++n) {
      const Vec2 k1x = vel, k1v = accel(x, vel);
      const Vec2 k2x = vel + 0.5 * h * k1v, k2v = accel(x + 0.5 * h * k1x, k2x);
      const Vec2 k3x = vel + 0.5 * h * k2v, k3v = accel(x + 0.5 * h * k2x, k3x);
      const Vec2 k4x = vel + h * k3v, k4v = accel(x + h * k3x, k4x);
      x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
      vel += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    const MetricSample m = metric_at(metric_, x);
    CollarPoint c;
    c.x = x;
    c.normal = vel / m.norm(vel);
    c.tangent = right_of(c.normal, m);
    return c;
  }

  /// Distance to the boundary for points inside the collar, by inverting collar_point.
  double distance_to_boundary(const Vec2& x) const {
    const Vec2 rel = x - spec_.center;
    double s = std::atan2(rel[1], rel[0]);
    if (s < 0) s += 2.0 * std::numbers::pi;
    const MetricSample m = metric_at(metric_, x);
    double r = m.norm(gamma(s) - x);
    for (int it = 0; it < 50; ++it) {
      const Vec2 res = collar_point(s, r).x - x;
      if (res.norm() < 1e-13) break;
      const double hs = 1e-6, hr = 1e-6;
      Mat2 jac;
      jac.col(0) = (collar_point(s + hs, r).x - collar_point(s - hs, r).x) / (2 * hs);
      jac.col(1) = (collar_point(s, r + hr).x - collar_point(s, r - hr).x) / (2 * hr);
      const Vec2 step = jac.lu().solve(res);
      s -= step[0];
      r -= step[1];
    }
    return r;
  }

private:
  // sigma-unit vector orthogonal to t with det[t, n] > 0.
  static Vec2 left_normal(const Vec2& t, const MetricSample& m) {
    const Vec2 covector(-t[1], t[0]);
    const Vec2 n = m.sigma_inv * covector;
    return n / std::sqrt(covector.dot(n));
  }

  // sigma-unit vector t orthogonal to n with det[t, n] > 0.
  static Vec2 right_of(const Vec2& n, const MetricSample& m) {
    const Vec2 covector(n[1], -n[0]);
    const Vec2 t = m.sigma_inv * covector;
    return t / std::sqrt(covector.dot(t));
  }

  void validate() {
    switch (spec_.kind) {
      case DomainKind::disk:
        if (!(spec_.radius > 0)) throw ScenarioError("disk radius must be positive");
        break;
      case DomainKind::ellipse:
        if (!(spec_.a > 0 && spec_.b > 0)) throw ScenarioError("ellipse semi-axes must be positive");
        break;
      case DomainKind::perturbed_disk:
        if (!(spec_.radius > 0) || !(std::abs(spec_.amplitude) < 1.0) || spec_.mode < 1)
          throw ScenarioError("perturbed_disk needs radius > 0, |amplitude| < 1, mode >= 1");
        break;
    }
    if (!in_chart(metric_, spec_.center)) throw ChartError("domain center outside the metric chart");

    constexpr int kSamples = 2048;
    kappa0_ = std::numeric_limits<double>::infinity();
    kappa_max_ = -kappa0_;
    min_radius_ = std::numeric_limits<double>::infinity();
    inradius_ = std::numeric_limits<double>::infinity();
    for (int j = 0; j < kSamples; ++j) {
      const double s = 2.0 * std::numbers::pi * j / kSamples;
      const Vec2 p = gamma(s);
      if (!in_chart(metric_, p)) throw ChartError("domain boundary leaves the metric chart");
      const double k = kappa(s);
      kappa0_ = std::min(kappa0_, k);
      kappa_max_ = std::max(kappa_max_, k);
      min_radius_ = std::min(min_radius_, radial(s).r);
      if (j % 16 == 0) inradius_ = std::min(inradius_, radial_length(p));
    }
    if (!(kappa0_ > 1e-8)) {
      throw ScenarioError("domain is not strictly convex: min geodesic curvature = " +
                          std::to_string(kappa0_));
    }
  }

  double radial_length(const Vec2& p) const {
    constexpr int n = 32;  // composite Simpson
    const Vec2 d = p - spec_.center;
    double sum = 0.0;
    for (int k = 0; k <= n; ++k) {
      const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
      const Vec2 x = spec_.center + (static_cast<double>(k) / n) * d;
      if (!in_chart(metric_, x)) throw ChartError("domain is not inside the metric chart");
      sum += w * metric_at(metric_, x).norm(d);
    }
    return sum / (3.0 * n);
  }

  DomainSpec spec_;
  Metric metric_;
  double kappa0_ = 0.0;
  double kappa_max_ = 0.0;
  double min_radius_ = 0.0;
  double inradius_ = 0.0;
};

inline ConvexDomain build_domain(const DomainSpec& spec, const Metric& metric) {
  return ConvexDomain(spec, metric);
}

}  // namespace lmcf
