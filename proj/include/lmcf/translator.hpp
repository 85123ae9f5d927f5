#pragma once

// Translating solutions: g^{ij} D_i D_j u = c3 with D_N u = phi v, reached through
// the regularized family g^{ij} D_i D_j u_eps = eps u_eps as eps -> 0.
//
// The regularized solution is carried as u_eps = w + c / eps with mean(w) = 0,
// so that c = eps * mean(u_eps) stays O(1) and eps = 0 is an admissible endpoint.
// Newton iterates on (w, c) with the bordered Jacobian
//     [ dF/du - eps I   -1 ]
//     [ weights / area   0 ].

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "lmcf/discrete_operator.hpp"
#include "lmcf/linear_solver.hpp"

namespace lmcf {

struct NewtonOptions {
  int max_iterations = 60;
  double tolerance = 1e-9;       ///< max-norm residual
  double min_damping = 1.0 / 1024.0;
};

struct ContinuationSchedule {
  double eps0 = 1.0;
  double ratio = 0.5;
  double eps_min = 1e-6;
  NewtonOptions newton;

  void validate() const {
    if (!(eps0 > eps_min && eps_min > 0.0)) throw ScenarioError("continuation needs eps0 > eps_min > 0");
    if (!(ratio > 0.0 && ratio < 1.0)) throw ScenarioError("continuation ratio must lie in (0, 1)");
  }
};

struct RegularizedSolution {
  double eps = 0.0;
  GridFunction w;    ///< zero-mean part
  double c = 0.0;    ///< eps * mean(u_eps)
  double residual = 0.0;
  int iterations = 0;

  /// u_eps itself; only meaningful for eps > 0.
  GridFunction u_eps() const { return w + c / eps; }
};

struct EpsTraceEntry {
  double eps;
  double c3_estimate;      ///< eps * mean(u_eps)
  double max_deviation;    ///< max over nodes |eps u_eps - c3|
  double mean_deviation;   ///< |eps mean(u_eps) - c3|
  int newton_iterations;
};

struct TranslatorSolution {
  GridFunction profile;           ///< zero-mean translator profile
  double c3 = 0.0;                ///< translation speed, the eps -> 0 limit
  double c3_continuation = 0.0;   ///< eps * mean(u_eps) at the last continuation step
  double c3_quadrature = 0.0;     ///< -int phi / int 1/v evaluated on the profile
  std::vector<EpsTraceEntry> eps_trace;
  double residual_interior = 0.0; ///< max |g^{ij} D_i D_j u - c3|
  double residual_boundary = 0.0; ///< max |D_N u - phi v| with one-sided D_N
  double sup_du2 = 0.0;
};

namespace detail {

inline Eigen::VectorXd zero_mean(const CurvilinearGrid& g, Eigen::VectorXd v) {
  double mean = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) mean += g.node(k).weight * v[k];
  v.array() -= mean / g.area();
  return v;
}

inline Eigen::VectorXd regularized_residual(const MeanCurvatureOperator& op, double eps,
                                            const Eigen::VectorXd& w, double c) {
  Eigen::VectorXd r = op.apply(w) - eps * w;
  r.array() -= c;
  return r;
}

}  // namespace detail

/// Solves the regularized problem at one eps by damped Newton, starting from `init`.
inline RegularizedSolution solve_regularized(double eps, const RegularizedSolution& init,
                                             const MeanCurvatureOperator& op,
                                             const NewtonOptions& opt = {}) {
  if (!(eps >= 0.0)) throw ScenarioError("eps must be non-negative");
  const auto& g = op.grid();
  const Eigen::Index n = static_cast<Eigen::Index>(g.size());
  Eigen::VectorXd w = detail::zero_mean(g, init.w.values);
  double c = init.c;
  Eigen::VectorXd r;
  try {
    r = detail::regularized_residual(op, eps, w, c);
  } catch (const SpacelikeViolation& e) {
    throw ConvergenceError(std::string("initial guess is not space-like: ") + e.what());
  }
  double rnorm = r.lpNorm<Eigen::Infinity>();

  Eigen::VectorXd weights(n);
  for (Eigen::Index k = 0; k < n; ++k) weights[k] = g.node(static_cast<std::size_t>(k)).weight / g.area();

  SparseSolver solver, bordered;
  int it = 0;
  std::vector<double> history{rnorm};
  for (; it < opt.max_iterations && rnorm >= opt.tolerance; ++it) {
    Eigen::SparseMatrix<double> jac = op.linearization(w, Linearization::full);
    Eigen::VectorXd delta(n + 1);
    bool eliminated = false;
    if (eps > 0.0) {
      // Schur elimination of the border: (J - eps I) is invertible for eps > 0.
      for (Eigen::Index k = 0; k < n; ++k) jac.coeffRef(k, k) -= eps;
      solver.factorize(jac);
      const Eigen::VectorXd x = solver.solve(Eigen::VectorXd(-r));
      const Eigen::VectorXd y = solver.solve(Eigen::VectorXd::Ones(n));
      const double denom = weights.dot(y);
      if (std::abs(denom) > 1e-12 * weights.sum() * y.lpNorm<Eigen::Infinity>()) {
        delta[n] = (-weights.dot(w) - weights.dot(x)) / denom;
        delta.head(n) = x + delta[n] * y;
        eliminated = true;
      }
      if (!eliminated) {
        for (Eigen::Index k = 0; k < n; ++k) jac.coeffRef(k, k) += eps;
      }
    }
    if (!eliminated) {
      std::vector<Eigen::Triplet<double>> trip;
      trip.reserve(jac.nonZeros() + 3 * n);
      for (int col = 0; col < jac.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator e(jac, col); e; ++e) {
          trip.emplace_back(static_cast<int>(e.row()), static_cast<int>(e.col()), e.value());
        }
      }
      for (Eigen::Index k = 0; k < n; ++k) {
        trip.emplace_back(static_cast<int>(k), static_cast<int>(k), -eps);
        trip.emplace_back(static_cast<int>(k), static_cast<int>(n), -1.0);
        trip.emplace_back(static_cast<int>(n), static_cast<int>(k), weights[k]);
      }
      Eigen::SparseMatrix<double> big(n + 1, n + 1);
      big.setFromTriplets(trip.begin(), trip.end());
      Eigen::VectorXd rhs(n + 1);
      rhs.head(n) = -r;
      rhs[n] = -weights.dot(w);
      delta = bordered.solve(big, rhs);
    }

    double lambda = 1.0;
    bool accepted = false;
    while (lambda >= opt.min_damping) {
      const Eigen::VectorXd w_try = w + lambda * delta.head(n);
      const double c_try = c + lambda * delta[n];
      try {
        Eigen::VectorXd r_try = detail::regularized_residual(op, eps, w_try, c_try);
        const double norm_try = r_try.lpNorm<Eigen::Infinity>();
        if (norm_try < (1.0 - 1e-4 * lambda) * rnorm || norm_try < opt.tolerance) {
          w = w_try;
          c = c_try;
          r = std::move(r_try);
          rnorm = norm_try;
          accepted = true;
          break;
        }
      } catch (const SpacelikeViolation&) {
        // leave the cone: damp further
      }
      lambda *= 0.5;
    }
    if (!accepted) {
      // Round-off floor: the full step is negligible relative to the iterate.
      if (delta.head(n).lpNorm<Eigen::Infinity>() < 1e-12 * (1.0 + w.lpNorm<Eigen::Infinity>()) &&
          std::abs(delta[n]) < 1e-13 * (1.0 + std::abs(c))) {
        break;
      }
      throw ConvergenceError("Newton stagnation at eps = " + std::to_string(eps) +
                             ", residual = " + std::to_string(rnorm));
    }
    history.push_back(rnorm);
    if (history.size() > 6) {
      const double before = history[history.size() - 6];
      if (rnorm > opt.tolerance && rnorm > (1.0 - 1e-3) * before) {
        throw ConvergenceError("Newton stagnation at eps = " + std::to_string(eps) +
                               ": residual reduction below 1e-3 over 5 steps");
      }
    }
  }
  if (rnorm >= opt.tolerance && it >= opt.max_iterations) {
    throw ConvergenceError("Newton did not converge at eps = " + std::to_string(eps) +
                           ", residual = " + std::to_string(rnorm));
  }
  RegularizedSolution out;
  out.eps = eps;
  out.w = GridFunction(op.grid_ptr(), w);
  out.c = c;
  out.residual = rnorm;
  out.iterations = it;
  return out;
}

/// Starting point u = 0.
inline RegularizedSolution zero_guess(const MeanCurvatureOperator& op) {
  RegularizedSolution s;
  s.w = GridFunction(op.grid_ptr(), 0.0);
  return s;
}

/// c3 = - int_{boundary} phi / int_Omega (1 - |Du|^2)^{-1/2}.
inline double compute_c3(const GridFunction& profile, const MeanCurvatureOperator& op) {
  const GridFunction one(op.grid_ptr(), 1.0);
  return -op.contact_angle().boundary_integral_value() / lorentz_weighted_integral(op, one, profile);
}

/// Profile shifted by c3 t: the translating solution at time t.
inline GridFunction translate_solution(const TranslatorSolution& sol, double t) {
  return sol.profile + sol.c3 * t;
}

namespace detail {

inline MeanCurvatureOperator scaled_operator(const MeanCurvatureOperator& op, double theta) {
  PhiSpec spec;
  spec.kind = PhiKind::table;
  const auto& samples = op.contact_angle().samples();
  spec.table.assign(samples.data(), samples.data() + samples.size());
  for (auto& v : spec.table) v *= theta;
  return MeanCurvatureOperator(op.grid_ptr(), spec);
}

// Solve at eps by scaling phi from a fraction of its value up to 1, warm-starting each stage.
inline RegularizedSolution solve_with_homotopy(double eps, const RegularizedSolution& init,
                                               const MeanCurvatureOperator& op, const NewtonOptions& opt) {
  try {
    return solve_regularized(eps, init, op, opt);
  } catch (const ConvergenceError&) {
  }
  RegularizedSolution cur = zero_guess(op);
  for (double theta : {0.125, 0.25, 0.5, 0.75, 1.0}) {
    if (theta < 1.0) {
      cur = solve_regularized(eps, cur, scaled_operator(op, theta), opt);
    } else {
      cur = solve_regularized(eps, cur, op, opt);
    }
  }
  return cur;
}

inline void fill_residuals(TranslatorSolution& sol, const MeanCurvatureOperator& op) {
  const Eigen::VectorXd F = op.apply(sol.profile.values);
  sol.residual_interior = (F.array() - sol.c3).abs().maxCoeff();
  sol.sup_du2 = op.du2(sol.profile.values).maxCoeff();
  sol.residual_boundary = contact_mismatch(op, sol.profile.values);
}

}  // namespace detail

/// Continuation in eps down the schedule, then the eps = 0 endpoint.
inline TranslatorSolution continuation(const ContinuationSchedule& schedule, const MeanCurvatureOperator& op,
                                       std::optional<RegularizedSolution> warm_start = std::nullopt) {
  schedule.validate();
  std::vector<RegularizedSolution> chain;
  RegularizedSolution cur = warm_start ? *warm_start : zero_guess(op);
  double eps = schedule.eps0;
  bool cauchy = false;
  while (true) {
    cur = detail::solve_with_homotopy(eps, cur, op, schedule.newton);
    chain.push_back(cur);
    if (chain.size() >= 2 && std::abs(chain.back().c - chain[chain.size() - 2].c) < 1e-8) {
      cauchy = true;
    }
    const double next = eps * schedule.ratio;
    if (cauchy || next < schedule.eps_min) break;
    eps = next;
  }
  const RegularizedSolution limit = solve_regularized(0.0, cur, op, schedule.newton);

  TranslatorSolution sol;
  sol.profile = GridFunction(op.grid_ptr(), detail::zero_mean(op.grid(), limit.w.values));
  sol.c3 = limit.c;
  sol.c3_continuation = cur.c;
  sol.c3_quadrature = compute_c3(sol.profile, op);
  for (const auto& s : chain) {
    const double max_dev = (s.eps * s.w.values.array() + (s.c - sol.c3)).abs().maxCoeff();
    sol.eps_trace.push_back({s.eps, s.c, max_dev, std::abs(s.c - sol.c3), s.iterations});
  }
  detail::fill_residuals(sol, op);

  // The continuation estimate must be a Cauchy sequence approaching the limit.
  const double gap = std::abs(sol.c3_continuation - sol.c3);
  if (!cauchy && gap > 1e-4) {
    throw ConvergenceError("continuation estimates are not Cauchy: |c(eps_min) - c3| = " + std::to_string(gap));
  }
  return sol;
}

}  // namespace lmcf
