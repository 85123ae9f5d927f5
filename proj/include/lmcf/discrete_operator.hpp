#pragma once

// Second-order finite-difference discretization of
//     F(u) = g^{ij}(Du) D_i D_j u     on the grid,
//     D_N u = phi v                   on the boundary ring,
// in the (rho, s) computational chart. The contact condition is closed with a
// ghost ring at rho = 1 + drho whose values make the centered radial difference
// at the boundary equal
//     D_N u = phi sqrt((1 - |D_T u|^2) / (1 + phi^2)),
// the algebraic solution of D_N u = phi v given the tangential derivative.

#include <cmath>
#include <vector>

#include <Eigen/Sparse>

#include "lmcf/contact_angle.hpp"
#include "lmcf/graph_geometry.hpp"
#include "lmcf/grid.hpp"

namespace lmcf {

/// Radial derivative enforced by the contact condition at one boundary node, and
/// its sensitivity to the tangential coordinate derivative u_s.
struct ContactClosure {
  double u_rho = 0.0;
  double du_rho_du_s = 0.0;
  double tangential = 0.0;  ///< D_T u
  double normal = 0.0;      ///< D_N u after closure
};

/// Closed-form normal derivative from the contact condition: D_N u for given phi and D_T u.
inline double contact_normal_derivative(double phi, double tangential) {
  const double t2 = tangential * tangential;
  if (!(t2 < kSpacelikeGuard)) throw SpacelikeViolation("contact closure (|D_T u| >= 1)", t2);
  return phi * std::sqrt((1.0 - t2) / (1.0 + phi * phi));
}

enum class Linearization {
  frozen,  ///< g^{ij} held at the current state (semi-implicit stepping)
  full,    ///< includes d g^{ij} / d(Du) (Newton)
};

class MeanCurvatureOperator {
public:
  MeanCurvatureOperator(GridPtr grid, ContactAngle phi) : grid_(std::move(grid)), phi_(std::move(phi)) {}
  MeanCurvatureOperator(GridPtr grid, const PhiSpec& phi)
      : grid_(std::move(grid)), phi_(phi, *grid_) {}

  const CurvilinearGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const ContactAngle& contact_angle() const { return phi_; }

  ContactClosure closure(const Eigen::VectorXd& u, int j) const {
    const auto& g = *grid_;
    const int nb = g.n_radial() - 1;
    const MetricSample& m = g.node(nb, j).metric;
    const double u_s = (u[g.index(nb, j + 1)] - u[g.index(nb, j - 1)]) / (2.0 * g.ds());
    const double speed = std::sqrt(m.sigma(1, 1));
    const double phi = phi_[g.wrap(j)];
    ContactClosure c;
    c.tangential = u_s / speed;
    const double t2 = c.tangential * c.tangential;
    if (!(t2 < kSpacelikeGuard)) {
      throw SpacelikeViolation("contact closure (|D_T u| >= 1)", t2, g.index(nb, j));
    }
    c.normal = contact_normal_derivative(phi, c.tangential);
    const double dnormal_dt = -phi * c.tangential / std::sqrt((1.0 - t2) * (1.0 + phi * phi));
    const double srr = m.sigma_inv(0, 0);
    const double srs = m.sigma_inv(0, 1);
    c.u_rho = -(c.normal * std::sqrt(srr) + srs * u_s) / srr;
    c.du_rho_du_s = -(dnormal_dt / speed * std::sqrt(srr) + srs) / srr;
    return c;
  }

  /// Ghost-ring values, one per angular index.
  Eigen::VectorXd ghosts(const Eigen::VectorXd& u) const {
    const auto& g = *grid_;
    Eigen::VectorXd out(g.n_angular());
    for (int j = 0; j < g.n_angular(); ++j) {
      out[j] = u[g.index(g.n_radial() - 2, j)] + 2.0 * g.drho() * closure(u, j).u_rho;
    }
    return out;
  }

  /// Value at lattice point (i, j), i in [-1, n_radial]; i = -1 crosses the center.
  double at(const Eigen::VectorXd& u, const Eigen::VectorXd& ghost, int i, int j) const {
    const auto& g = *grid_;
    if (i < 0) return u[g.index(0, j + g.n_angular() / 2)];
    if (i >= g.n_radial()) return ghost[g.wrap(j)];
    return u[g.index(i, j)];
  }

  /// Partial derivatives in (rho, s) at node (i, j), using ghost values on the boundary ring.
  LocalDerivatives partials(const Eigen::VectorXd& u, const Eigen::VectorXd& ghost, int i, int j) const {
    const auto& g = *grid_;
    const double hr = g.drho(), hs = g.ds();
    auto v = [&](int di, int dj) { return at(u, ghost, i + di, j + dj); };
    LocalDerivatives d;
    d.grad[0] = (v(1, 0) - v(-1, 0)) / (2.0 * hr);
    d.grad[1] = (v(0, 1) - v(0, -1)) / (2.0 * hs);
    d.second(0, 0) = (v(1, 0) - 2.0 * v(0, 0) + v(-1, 0)) / (hr * hr);
    d.second(1, 1) = (v(0, 1) - 2.0 * v(0, 0) + v(0, -1)) / (hs * hs);
    d.second(0, 1) = (v(1, 1) - v(1, -1) - v(-1, 1) + v(-1, -1)) / (4.0 * hr * hs);
    d.second(1, 0) = d.second(0, 1);
    return d;
  }

  /// Partials of an arbitrary nodal field away from the boundary ring (i <= n_radial - 2).
  LocalDerivatives interior_partials(const Eigen::VectorXd& f, int i, int j) const {
    static const Eigen::VectorXd no_ghost;
    return partials(f, no_ghost, i, j);
  }

  /// Discrete gradient (rho, s components) of u at every node, contact closure on the boundary.
  std::vector<Vec2> gradients(const Eigen::VectorXd& u) const {
    const auto& g = *grid_;
    const Eigen::VectorXd gh = ghosts(u);
    std::vector<Vec2> out(g.size());
    for (int i = 0; i < g.n_radial(); ++i) {
      for (int j = 0; j < g.n_angular(); ++j) {
        auto v = [&](int di, int dj) { return at(u, gh, i + di, j + dj); };
        out[g.index(i, j)] = Vec2((v(1, 0) - v(-1, 0)) / (2.0 * g.drho()),
                                  (v(0, 1) - v(0, -1)) / (2.0 * g.ds()));
      }
    }
    return out;
  }

  /// |Du|^2_sigma at every node.
  Eigen::VectorXd du2(const Eigen::VectorXd& u) const {
    const auto grads = gradients(u);
    Eigen::VectorXd out(grid_->size());
    for (std::size_t k = 0; k < grads.size(); ++k) out[k] = gradient_norm2(grads[k], grid_->node(k).metric);
    return out;
  }

  /// Full graph geometry at node (i, j).
  GraphGeometry geometry(const Eigen::VectorXd& u, const Eigen::VectorXd& ghost, int i, int j) const {
    const auto& m = grid_->node(i, j).metric;
    const auto d = partials(u, ghost, i, j);
    try {
      return graph_geometry(d, m);
    } catch (const SpacelikeViolation& e) {
      throw SpacelikeViolation("mean curvature operator", e.du2(), grid_->index(i, j));
    }
  }

  /// F(u) = g^{ij} D_i D_j u = H v at every node.
  Eigen::VectorXd apply(const Eigen::VectorXd& u) const {
    const auto& g = *grid_;
    const Eigen::VectorXd gh = ghosts(u);
    Eigen::VectorXd out(g.size());
    for (int i = 0; i < g.n_radial(); ++i) {
      for (int j = 0; j < g.n_angular(); ++j) out[g.index(i, j)] = geometry(u, gh, i, j).flow_speed();
    }
    return out;
  }

  GridFunction apply(const GridFunction& u) const { return GridFunction(grid_, apply(u.values)); }

  /// Mean curvature H at every node.
  Eigen::VectorXd mean_curvature(const Eigen::VectorXd& u) const {
    const auto& g = *grid_;
    const Eigen::VectorXd gh = ghosts(u);
    Eigen::VectorXd out(g.size());
    for (int i = 0; i < g.n_radial(); ++i) {
      for (int j = 0; j < g.n_angular(); ++j) out[g.index(i, j)] = geometry(u, gh, i, j).H;
    }
    return out;
  }

  /// Jacobian of F at u (ghost closure linearized in both modes).
  Eigen::SparseMatrix<double> linearization(const Eigen::VectorXd& u, Linearization mode) const {
    const auto& g = *grid_;
    const int nr = g.n_radial(), na = g.n_angular();
    const double hr = g.drho(), hs = g.ds();
    const Eigen::VectorXd gh = ghosts(u);
    std::vector<double> dq(na);
    for (int j = 0; j < na; ++j) dq[j] = closure(u, j).du_rho_du_s;

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(g.size() * 14);
    for (int i = 0; i < nr; ++i) {
      for (int j = 0; j < na; ++j) {
        const int row = static_cast<int>(g.index(i, j));
        const MetricSample& m = g.node(i, j).metric;
        const auto d = partials(u, gh, i, j);
        const Vec2 p = d.grad;
        const double w = gradient_norm2(p, m);
        if (!(w < kSpacelikeGuard)) throw SpacelikeViolation("linearization", w, g.index(i, j));
        const Mat2 A = graph_inverse_metric(p, m);
        Vec2 B;
        for (int c = 0; c < 2; ++c) B[c] = -A.cwiseProduct(m.christoffel[c]).sum();
        if (mode == Linearization::full) {
          const Mat2 hess = covariant_hessian(d, m);
          const Vec2 P = m.sigma_inv * p;
          const double denom = 1.0 - w;
          B += 2.0 * m.sigma_inv * hess * P / denom + 2.0 * P * P.dot(hess * P) / (denom * denom);
        }
        auto add = [&](int ii, int jj, double coef) {
          if (ii < 0) {
            trip.emplace_back(row, static_cast<int>(g.index(0, jj + na / 2)), coef);
          } else if (ii >= nr) {
            trip.emplace_back(row, static_cast<int>(g.index(nr - 2, jj)), coef);
            const double c2 = coef * 2.0 * hr * dq[g.wrap(jj)] / (2.0 * hs);
            trip.emplace_back(row, static_cast<int>(g.index(nr - 1, jj + 1)), c2);
            trip.emplace_back(row, static_cast<int>(g.index(nr - 1, jj - 1)), -c2);
          } else {
            trip.emplace_back(row, static_cast<int>(g.index(ii, jj)), coef);
          }
        };
        add(i, j, -2.0 * A(0, 0) / (hr * hr) - 2.0 * A(1, 1) / (hs * hs));
        add(i + 1, j, A(0, 0) / (hr * hr) + B[0] / (2.0 * hr));
        add(i - 1, j, A(0, 0) / (hr * hr) - B[0] / (2.0 * hr));
        add(i, j + 1, A(1, 1) / (hs * hs) + B[1] / (2.0 * hs));
        add(i, j - 1, A(1, 1) / (hs * hs) - B[1] / (2.0 * hs));
        const double cross = 2.0 * A(0, 1) / (4.0 * hr * hs);
        add(i + 1, j + 1, cross);
        add(i - 1, j - 1, cross);
        add(i + 1, j - 1, -cross);
        add(i - 1, j + 1, -cross);
      }
    }
    Eigen::SparseMatrix<double> J(static_cast<Eigen::Index>(g.size()), static_cast<Eigen::Index>(g.size()));
    J.setFromTriplets(trip.begin(), trip.end());
    return J;
  }

  /// Lorentz area density 1/v at every node.
  Eigen::VectorXd inverse_v(const Eigen::VectorXd& u) const {
    Eigen::VectorXd w = du2(u);
    for (Eigen::Index k = 0; k < w.size(); ++k) {
      if (!(w[k] < kSpacelikeGuard)) throw SpacelikeViolation("inverse_v", w[k], static_cast<std::size_t>(k));
      w[k] = 1.0 / std::sqrt(1.0 - w[k]);
    }
    return w;
  }

private:
  GridPtr grid_;
  ContactAngle phi_;
};

/// Integral over the domain of f / v, with v from the contact-closed gradient of u.
inline double lorentz_weighted_integral(const MeanCurvatureOperator& op, const GridFunction& f,
                                        const GridFunction& u) {
  const Eigen::VectorXd inv_v = op.inverse_v(u.values);
  double sum = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) sum += op.grid().node(k).weight * f[k] * inv_v[k];
  return sum;
}

/// max_j |D_N u - phi v| at the boundary with a one-sided second-order D_N, independent
/// of the ghost closure. Small only when u already satisfies the contact condition.
inline double contact_mismatch(const MeanCurvatureOperator& op, const Eigen::VectorXd& u) {
  const auto& g = op.grid();
  const int nb = g.n_radial() - 1;
  double worst = 0.0;
  for (int j = 0; j < g.n_angular(); ++j) {
    const MetricSample& m = g.node(nb, j).metric;
    const double u_rho = (3.0 * u[g.index(nb, j)] - 4.0 * u[g.index(nb - 1, j)] + u[g.index(nb - 2, j)]) /
                         (2.0 * g.drho());
    const double u_s = (u[g.index(nb, j + 1)] - u[g.index(nb, j - 1)]) / (2.0 * g.ds());
    const Vec2 p(u_rho, u_s);
    const double dn = -(m.sigma_inv(0, 0) * u_rho + m.sigma_inv(0, 1) * u_s) / std::sqrt(m.sigma_inv(0, 0));
    const double w = gradient_norm2(p, m);
    if (!(w < 1.0)) throw SpacelikeViolation("boundary", w, g.index(nb, j));
    worst = std::max(worst, std::abs(dn - op.contact_angle()[j] * std::sqrt(1.0 - w)));
  }
  return worst;
}

}  // namespace lmcf
