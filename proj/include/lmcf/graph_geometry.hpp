#pragma once

// Geometry of a space-like graph {(x, u(x))} in (M^2 x R, sigma - ds^2).

#include <array>
#include <cmath>
#include <span>
#include <string_view>

#include "lmcf/metric.hpp"

namespace lmcf {

/// |Du|^2 at or above this value is treated as leaving the space-like cone.
inline constexpr double kSpacelikeGuard = 1.0 - 1e-10;

/// Chart partial derivatives of a scalar at one point.
struct LocalDerivatives {
  Vec2 grad = Vec2::Zero();    ///< d_i u
  Mat2 second = Mat2::Zero();  ///< d_i d_j u
};

/// 3x3 block of samples on a uniform chart lattice centered at the evaluation point.
/// values[a][b] is u(x0 + (a-1) hx e1 + (b-1) hy e2).
struct Patch3x3 {
  std::array<std::array<double, 3>, 3> values{};
  double hx = 1.0;
  double hy = 1.0;

  LocalDerivatives derivatives() const {
    const auto& v = values;
    LocalDerivatives d;
    d.grad[0] = (v[2][1] - v[0][1]) / (2.0 * hx);
    d.grad[1] = (v[1][2] - v[1][0]) / (2.0 * hy);
    d.second(0, 0) = (v[2][1] - 2.0 * v[1][1] + v[0][1]) / (hx * hx);
    d.second(1, 1) = (v[1][2] - 2.0 * v[1][1] + v[1][0]) / (hy * hy);
    d.second(0, 1) = (v[2][2] - v[2][0] - v[0][2] + v[0][0]) / (4.0 * hx * hy);
    d.second(1, 0) = d.second(0, 1);
    return d;
  }
};

/// D_i D_j u = d_i d_j u - Gamma^k_ij d_k u.
inline Mat2 covariant_hessian(const LocalDerivatives& d, const MetricSample& m) {
  Mat2 h = d.second;
  for (int k = 0; k < 2; ++k) h -= m.christoffel[k] * d.grad[k];
  return 0.5 * (h + h.transpose());
}

inline Mat2 covariant_hessian(const Patch3x3& patch, const MetricSample& m) {
  return covariant_hessian(patch.derivatives(), m);
}

/// |Du|^2_sigma from a chart gradient.
inline double gradient_norm2(const Vec2& du, const MetricSample& m) {
  return du.dot(m.sigma_inv * du);
}

/// g^{ij} = sigma^{ij} + D^i u D^j u / (1 - |Du|^2). Caller guarantees |Du|^2 < 1.
inline Mat2 graph_inverse_metric(const Vec2& du, const MetricSample& m) {
  const Vec2 up = m.sigma_inv * du;
  const double w = du.dot(up);
  return m.sigma_inv + up * up.transpose() / (1.0 - w);
}

struct GraphGeometry {
  Vec2 du;        ///< D_i u (lower index)
  double du2;     ///< |Du|^2_sigma
  double v;       ///< sqrt(1 - |Du|^2)
  Mat2 g_lower;   ///< sigma_ij - D_i u D_j u
  Mat2 g_upper;   ///< sigma^ij + D^i u D^j u / v^2
  Mat2 hessian;   ///< D_i D_j u
  double H;       ///< scalar mean curvature

  /// g^{ij} D_i D_j u, the right side of the flow; equals H v.
  double flow_speed() const { return (g_upper.cwiseProduct(hessian)).sum(); }
};

/// Throws SpacelikeViolation when |Du|^2 >= kSpacelikeGuard.
inline GraphGeometry graph_geometry(const Vec2& du, const Mat2& hessian, const MetricSample& m) {
  GraphGeometry g;
  g.du = du;
  g.du2 = gradient_norm2(du, m);
  if (!(g.du2 < kSpacelikeGuard)) throw SpacelikeViolation("graph_geometry", g.du2);
  g.v = std::sqrt(1.0 - g.du2);
  g.g_lower = m.sigma - du * du.transpose();
  g.g_upper = graph_inverse_metric(du, m);
  g.hessian = hessian;
  g.H = g.g_upper.cwiseProduct(hessian).sum() / g.v;
  return g;
}

inline GraphGeometry graph_geometry(const LocalDerivatives& d, const MetricSample& m) {
  return graph_geometry(d.grad, covariant_hessian(d, m), m);
}

// ---------------------------------------------------------------------------
// Evolution of |Du|^2 along the flow.
//
//   d/dt w = g^{ik} D_i w D_k w / v^2 + g^{ij} D_i D_j w
//            - a |D^2 u|^2 - b |Dw|^2 [/ v^2] - c K w,      w = |Du|^2.
//
// The coefficients (a, b, c) and whether the |Dw|^2 term carries 1/v^2 differ
// between readings of the identity; the residual study picks the one that
// converges.

struct EvoDuConvention {
  std::string_view name;
  double hessian_coef;
  double gradient_coef;
  bool gradient_over_v2;
  double curvature_coef;
};

inline constexpr std::array<EvoDuConvention, 4> kEvoDuConventions{{
    {"as_printed", 1.0, 1.0, false, 1.0},
    {"as_printed_2K", 1.0, 1.0, false, 2.0},
    {"rederived", 2.0, 0.5, true, 2.0},
    {"rederived_1K", 2.0, 0.5, true, 1.0},
}};

/// Pointwise data entering the |Du|^2 evolution identity.
struct EvoDuInputs {
  Vec2 du;        ///< D u
  Mat2 hess_u;    ///< D^2 u
  Vec2 dw;        ///< D |Du|^2
  Mat2 hess_w;    ///< D^2 |Du|^2
};

inline double evo_du_rhs(const EvoDuInputs& in, const MetricSample& m,
                         const EvoDuConvention& conv) {
  const double w = gradient_norm2(in.du, m);
  if (!(w < kSpacelikeGuard)) throw SpacelikeViolation("evo_du_rhs", w);
  const double v2 = 1.0 - w;
  const Mat2 g = graph_inverse_metric(in.du, m);
  const double transport = in.dw.dot(g * in.dw) / v2;
  const double diffusion = g.cwiseProduct(in.hess_w).sum();
  const Mat2 mixed = m.sigma_inv * in.hess_u * m.sigma_inv;
  const double hess2 = mixed.cwiseProduct(in.hess_u).sum();
  double grad2 = in.dw.dot(m.sigma_inv * in.dw);
  if (conv.gradient_over_v2) grad2 /= v2;
  return transport + diffusion - conv.hessian_coef * hess2 - conv.gradient_coef * grad2 -
         conv.curvature_coef * m.gauss_curvature * w;
}

}  // namespace lmcf
