#pragma once

// Boundary-fitted polar-type grid over a ConvexDomain.
//
// Computational coordinates (rho, s) in (0, 1] x [0, 2pi) map to the chart by
//   x(rho, s) = center + rho [R0 + b(rho) (R(s) - R0)] (cos s, sin s),
// with R0 = min R and a C-infinity blend b that vanishes on the core rho < 1/4,
// so the map is an exact polar map near the center. Radial nodes sit at
// rho_i = (i + 1/2) drho with drho = 1/(n_radial - 1/2): the last ring is the
// boundary and the point at rho = -drho/2 is the node (0, j + n_angular/2).
//
// All covariant computations on the grid use the pull-back of sigma to (rho, s).

#include <cmath>
#include <memory>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lmcf/domain.hpp"

namespace lmcf {

namespace detail {

// Smooth step from 0 (t <= 0) to 1 (t >= 1) with first and second derivatives.
struct SmoothStep {
  double value, d1, d2;
};

inline SmoothStep smooth_step(double t) {
  if (t <= 0.0) return {0.0, 0.0, 0.0};
  if (t >= 1.0) return {1.0, 0.0, 0.0};
  auto f = [](double x) { return std::exp(-1.0 / x); };
  auto fp = [&](double x) { return f(x) / (x * x); };
  auto fpp = [&](double x) { return f(x) * (1.0 / (x * x * x * x) - 2.0 / (x * x * x)); };
  const double A = f(t), B = f(1.0 - t);
  const double Ap = fp(t), Bp = -fp(1.0 - t);
  const double App = fpp(t), Bpp = fpp(1.0 - t);
  const double S = A + B;
  const double N = Ap * B - A * Bp;
  const double Np = App * B - A * Bpp;
  return {A / S, N / (S * S), (Np * S - 2.0 * N * (Ap + Bp)) / (S * S * S)};
}

}  // namespace detail

/// Pull-back data at one grid node.
struct GridNode {
  Vec2 x;              ///< chart position
  Mat2 jacobian;       ///< columns dx/drho, dx/ds
  MetricSample metric; ///< sigma pulled back to (rho, s), with its Christoffel symbols
  double sqrt_det = 0; ///< sqrt(det sigma~), the mapped volume element
  double weight = 0;   ///< quadrature weight
};

struct MappingDerivatives {
  Vec2 x;
  Mat2 jacobian;
  std::array<Vec2, 3> second;  ///< x_{rho rho}, x_{rho s}, x_{s s}
};

class CurvilinearGrid {
public:
  static constexpr double kCoreRadius = 0.25;

  CurvilinearGrid(ConvexDomain domain, int n_radial, int n_angular)
      : domain_(std::move(domain)), n_radial_(n_radial), n_angular_(n_angular) {
    if (n_radial < 8) throw ScenarioError("n_radial must be at least 8");
    if (n_angular < 16 || n_angular % 2 != 0)
      throw ScenarioError("n_angular must be even and at least 16");
    drho_ = 1.0 / (n_radial - 0.5);
    ds_ = 2.0 * std::numbers::pi / n_angular;
    build();
  }

  const ConvexDomain& domain() const { return domain_; }
  int n_radial() const { return n_radial_; }
  int n_angular() const { return n_angular_; }
  std::size_t size() const { return nodes_.size(); }
  double drho() const { return drho_; }
  double ds() const { return ds_; }
  /// Representative spacing: drho times the sigma-perimeter over 2 pi.
  double h() const { return h_; }

  double rho(int i) const { return i == n_radial_ - 1 ? 1.0 : (i + 0.5) * drho_; }
  double s(int j) const { return j * ds_; }

  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * n_angular_ + wrap(j);
  }
  int wrap(int j) const { return ((j % n_angular_) + n_angular_) % n_angular_; }
  bool is_boundary(std::size_t k) const {
    return static_cast<int>(k / n_angular_) == n_radial_ - 1;
  }

  const GridNode& node(std::size_t k) const { return nodes_[k]; }
  const GridNode& node(int i, int j) const { return nodes_[index(i, j)]; }
  const std::vector<GridNode>& nodes() const { return nodes_; }

  /// sigma-length of d/ds on the boundary ring, |gamma'(s_j)|_sigma.
  double boundary_speed(int j) const { return boundary_speed_[wrap(j)]; }

  double area() const { return area_; }

  MappingDerivatives mapping(double rho, double s) const {
    const auto prof = domain_.radial(s);
    const double r0 = domain_.min_radius();
    const auto blend = detail::smooth_step((std::abs(rho) - kCoreRadius) / (1.0 - kCoreRadius));
    const double scale = 1.0 / (1.0 - kCoreRadius);
    const double b = blend.value;
    const double sgn = rho < 0 ? -1.0 : 1.0;
    const double bp = sgn * blend.d1 * scale;
    const double bpp = blend.d2 * scale * scale;
    const double dr = prof.r - r0;

    const double q = rho * (r0 + b * dr);
    const double q_r = r0 + b * dr + rho * bp * dr;
    const double q_rr = 2.0 * bp * dr + rho * bpp * dr;
    const double q_s = rho * b * prof.dr;
    const double q_rs = (b + rho * bp) * prof.dr;
    const double q_ss = rho * b * prof.ddr;

    const Vec2 e(std::cos(s), std::sin(s)), ep(-std::sin(s), std::cos(s));
    MappingDerivatives m;
    m.x = domain_.center() + q * e;
    m.jacobian.col(0) = q_r * e;
    m.jacobian.col(1) = q_s * e + q * ep;
    m.second[0] = q_rr * e;
    m.second[1] = q_rs * e + q_r * ep;
    m.second[2] = q_ss * e + 2.0 * q_s * ep - q * e;
    return m;
  }

  /// Writes one CSV row per node: i, j, rho, s, x, y, sqrt_det, weight.
  void write_csv(std::ostream& os) const {
    os << "i,j,rho,s,x,y,sqrt_det,weight\n";
    os.precision(17);
    for (int i = 0; i < n_radial_; ++i) {
      for (int j = 0; j < n_angular_; ++j) {
        const auto& n = node(i, j);
        os << i << ',' << j << ',' << rho(i) << ',' << s(j) << ',' << n.x[0] << ',' << n.x[1]
           << ',' << n.sqrt_det << ',' << n.weight << '\n';
      }
    }
  }

private:
  void build() {
    const Metric& metric = domain_.metric();
    nodes_.resize(static_cast<std::size_t>(n_radial_) * n_angular_);
    boundary_speed_.assign(n_angular_, 0.0);
    h_ = drho_ * domain_.perimeter() / (2.0 * std::numbers::pi);

    for (int i = 0; i < n_radial_; ++i) {
      double radial_weight = drho_;
      if (i == n_radial_ - 2) radial_weight = 1.125 * drho_;
      if (i == n_radial_ - 1) radial_weight = 0.375 * drho_;
      for (int j = 0; j < n_angular_; ++j) {
        const auto md = mapping(rho(i), s(j));
        GridNode& n = nodes_[index(i, j)];
        n.x = md.x;
        n.jacobian = md.jacobian;
        const double det_j = md.jacobian.determinant();
        if (!(det_j > 0.0)) {
          throw ScenarioError("degenerate grid Jacobian at node (" + std::to_string(i) + ", " +
                              std::to_string(j) + ")");
        }
        const MetricSample chart = metric_at(metric, md.x);
        MetricSample& c = n.metric;
        c.sigma = md.jacobian.transpose() * chart.sigma * md.jacobian;
        c.sigma_inv = c.sigma.inverse();
        c.gauss_curvature = chart.gauss_curvature;
        const Mat2 jinv = md.jacobian.inverse();
        for (int a = 0; a < 2; ++a) {
          for (int bb = a; bb < 2; ++bb) {
            Vec2 acc = md.second[a + bb];
            const Vec2 ja = md.jacobian.col(a), jb = md.jacobian.col(bb);
            for (int k = 0; k < 2; ++k) acc[k] += ja.dot(chart.christoffel[k] * jb);
            const Vec2 g = jinv * acc;
            for (int k = 0; k < 2; ++k) {
              c.christoffel[k](a, bb) = g[k];
              c.christoffel[k](bb, a) = g[k];
            }
          }
        }
        n.sqrt_det = std::sqrt(c.sigma.determinant());
        n.weight = radial_weight * ds_ * n.sqrt_det;
        if (i == n_radial_ - 1) boundary_speed_[j] = std::sqrt(c.sigma(1, 1));
      }
    }
    area_ = 0.0;
    for (const auto& n : nodes_) area_ += n.weight;
  }

  ConvexDomain domain_;
  int n_radial_;
  int n_angular_;
  double drho_ = 0;
  double ds_ = 0;
  double h_ = 0;
  double area_ = 0;
  std::vector<GridNode> nodes_;
  std::vector<double> boundary_speed_;
};

using GridPtr = std::shared_ptr<const CurvilinearGrid>;

inline GridPtr build_grid(const ConvexDomain& domain, int n_radial, int n_angular) {
  return std::make_shared<const CurvilinearGrid>(domain, n_radial, n_angular);
}

/// Nodal scalar field on a grid.
struct GridFunction {
  GridPtr grid;
  Eigen::VectorXd values;

  GridFunction() = default;
  explicit GridFunction(GridPtr g, double fill = 0.0)
      : grid(std::move(g)), values(Eigen::VectorXd::Constant(grid->size(), fill)) {}
  GridFunction(GridPtr g, Eigen::VectorXd v) : grid(std::move(g)), values(std::move(v)) {}

  template <typename F>
  static GridFunction sample(GridPtr g, F&& f) {
    GridFunction out(g);
    for (std::size_t k = 0; k < g->size(); ++k) out.values[k] = f(g->node(k).x);
    return out;
  }

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
  double operator[](std::size_t k) const { return values[static_cast<Eigen::Index>(k)]; }
  double& operator[](std::size_t k) { return values[static_cast<Eigen::Index>(k)]; }

  double max() const { return values.maxCoeff(); }
  double min() const { return values.minCoeff(); }
  double osc() const { return max() - min(); }

  GridFunction& operator+=(double c) { values.array() += c; return *this; }
  GridFunction& operator+=(const GridFunction& o) { values += o.values; return *this; }
  GridFunction& operator-=(const GridFunction& o) { values -= o.values; return *this; }
  GridFunction& operator*=(double c) { values *= c; return *this; }

  friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
  friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
  friend GridFunction operator+(GridFunction a, double c) { return a += c; }
  friend GridFunction operator*(double c, GridFunction a) { return a *= c; }
};

/// Mapped second-order rule over the domain.
inline double domain_integral(const GridFunction& f) {
  double sum = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) sum += f.grid->node(k).weight * f[k];
  return sum;
}

inline double domain_mean(const GridFunction& f) { return domain_integral(f) / f.grid->area(); }

/// Periodic trapezoid along the boundary ring; `f[j]` is the value at s_j.
inline double boundary_integral(const CurvilinearGrid& grid, const Eigen::VectorXd& f) {
  double sum = 0.0;
  for (int j = 0; j < grid.n_angular(); ++j) sum += f[j] * grid.boundary_speed(j);
  return sum * grid.ds();
}

/// Boundary values of a grid function, ordered by s_j.
inline Eigen::VectorXd boundary_values(const GridFunction& f) {
  const auto& g = *f.grid;
  Eigen::VectorXd out(g.n_angular());
  for (int j = 0; j < g.n_angular(); ++j) out[j] = f[g.index(g.n_radial() - 1, j)];
  return out;
}

}  // namespace lmcf
