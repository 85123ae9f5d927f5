#pragma once

// Time integration of u_t = g^{ij}(Du) D_i D_j u with the contact-angle closure.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lmcf/discrete_operator.hpp"
#include "lmcf/linear_solver.hpp"

namespace lmcf {

enum class Scheme { explicit_euler, semi_implicit };

struct StepperConfig {
  Scheme scheme = Scheme::semi_implicit;
  double dt = 0.0;           ///< initial step; 0 selects 0.25 diam^2 / n_radial^2
  double cfl = 0.4;          ///< explicit scheme only
  double dt_growth = 1.15;   ///< semi-implicit step growth per accepted step
  double dt_max = 0.1;
  double tol_speed = 1e-7;   ///< convergence: max |u_t - mean u_t| < tol_speed
  double max_time = 60.0;
  double end_time = 0.0;     ///< > 0: stop here without requiring convergence (diagnostic runs)
  double delta_space = 1e-3; ///< reject steps with sup |Du|^2 > 1 - delta_space
  long max_steps = 2000000;
  std::vector<double> dense_sample_times;  ///< keep (u^{n-1}, u^n, u^{n+1}) around these times

  void validate() const {
    if (!(dt >= 0.0)) throw ScenarioError("dt must be non-negative");
    if (!(delta_space > 0.0 && delta_space <= 1e-2)) throw ScenarioError("delta_space must lie in (0, 1e-2]");
    if (!(cfl > 0.0) || !(dt_growth >= 1.0) || !(dt_max > 0.0) || !(tol_speed > 0.0) || !(max_time > 0.0) ||
        !(end_time >= 0.0))
      throw ScenarioError("invalid stepper configuration");
  }
};

struct FlowState {
  GridFunction u;
  double t = 0.0;
  GridFunction u_t;
  double sup_du2 = 0.0;  ///< running max of |Du|^2
  double sup_ut = 0.0;   ///< running max of |u_t|
  GridFunction H;
  long step_count = 0;
  double dt = 0.0;       ///< step to try next
};

/// One row of the run time series.
struct TimeSample {
  double t = 0;
  double sup_ut = 0;         ///< max |u_t| at this time
  double sup_du2 = 0;        ///< max |Du|^2 at this time
  double mean_ut = 0;        ///< area mean of u_t
  double hv_residual = 0;    ///< max |H v - u_t|
  double osc_vs_reference = 0;
  double abs_diff_max = 0;   ///< max |u - u_ref|
  double energy = 0;         ///< int v - int_{boundary} u phi
  double dissipation = 0;    ///< int u_t^2 / v over the last step
  double max_H = 0;
  double u_max = 0;
  double u_min = 0;
  double dt = 0;
};

/// Three consecutive states around a requested sample time.
struct DenseSnapshot {
  double t;
  double dt_prev;
  double dt_next;
  GridFunction u_prev, u, u_next;
};

struct FlowRun {
  FlowState state;
  std::optional<FlowState> reference;
  double speed_estimate = 0.0;
  bool converged = false;
  bool reached_end_time = false;
  std::string failure;
  double sup_du2_initial = 0.0;
  double sup_ut_initial = 0.0;   ///< max |F(u0)|, F the discrete flow operator
  std::vector<TimeSample> series;
  std::vector<DenseSnapshot> dense;
};

/// 0.25 (sigma-diameter)^2 / n_radial^2.
inline double default_time_step(const CurvilinearGrid& g) {
  const double diam = g.domain().perimeter() / std::numbers::pi;
  return 0.25 * diam * diam / (static_cast<double>(g.n_radial()) * g.n_radial());
}

namespace detail {

inline double explicit_time_step(const MeanCurvatureOperator& op, const Eigen::VectorXd& u, double cfl) {
  const auto& g = op.grid();
  const auto grads = op.gradients(u);
  double worst = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Mat2 A = graph_inverse_metric(grads[k], g.node(k).metric);
    const double rate = 2.0 * A(0, 0) / (g.drho() * g.drho()) + 2.0 * A(1, 1) / (g.ds() * g.ds()) +
                        2.0 * std::abs(A(0, 1)) / (g.drho() * g.ds());
    worst = std::max(worst, rate);
  }
  return cfl / worst;
}

}  // namespace detail

/// Advances the flow by one accepted step.
class FlowStepper {
public:
  FlowStepper(const MeanCurvatureOperator& op, StepperConfig cfg) : op_(op), cfg_(std::move(cfg)) {
    cfg_.validate();
  }

  const MeanCurvatureOperator& op() const { return op_; }
  const StepperConfig& config() const { return cfg_; }

  FlowState initial_state(const GridFunction& u0) const {
    FlowState s;
    s.u = u0;
    const Eigen::VectorXd w = op_.du2(u0.values);
    s.sup_du2 = w.maxCoeff();
    if (!(s.sup_du2 < 1.0 - cfg_.delta_space)) {
      throw SpacelikeViolation("initial data", s.sup_du2);
    }
    s.u_t = op_.apply(u0);
    s.sup_ut = s.u_t.values.cwiseAbs().maxCoeff();
    s.H = GridFunction(op_.grid_ptr(), op_.mean_curvature(u0.values));
    s.dt = cfg_.dt > 0.0 ? cfg_.dt : default_time_step(op_.grid());
    return s;
  }

  /// Proposed increment u^{n+1} - u^n for step dt; throws SpacelikeViolation if the
  /// current state is not admissible.
  Eigen::VectorXd increment(const Eigen::VectorXd& u, double dt) {
    const Eigen::VectorXd F = op_.apply(u);
    if (cfg_.scheme == Scheme::explicit_euler) return dt * F;
    Eigen::SparseMatrix<double> m = op_.linearization(u, Linearization::frozen);
    m *= -dt;
    for (Eigen::Index k = 0; k < m.rows(); ++k) m.coeffRef(k, k) += 1.0;
    return solver_.solve(m, dt * F);
  }

  double max_dt(const Eigen::VectorXd& u, double proposed) const {
    if (cfg_.scheme == Scheme::explicit_euler) {
      return std::min(proposed, detail::explicit_time_step(op_, u, cfg_.cfl));
    }
    return proposed;
  }

  /// Whether u is space-like with the configured margin.
  bool admissible(const Eigen::VectorXd& u, double* sup_du2 = nullptr) const {
    try {
      const double w = op_.du2(u).maxCoeff();
      if (sup_du2) *sup_du2 = w;
      return w <= 1.0 - cfg_.delta_space;
    } catch (const SpacelikeViolation&) {
      return false;
    }
  }

  /// Completes a state from a new u.
  void finish(FlowState& s, const Eigen::VectorXd& u_new, double dt, double sup_du2_new) const {
    GridFunction ut(op_.grid_ptr(), (u_new - s.u.values) / dt);
    s.u.values = u_new;
    s.u_t = std::move(ut);
    s.t += dt;
    s.sup_du2 = std::max(s.sup_du2, sup_du2_new);
    s.sup_ut = std::max(s.sup_ut, s.u_t.values.cwiseAbs().maxCoeff());
    s.H = GridFunction(op_.grid_ptr(), op_.mean_curvature(u_new));
    ++s.step_count;
  }

private:
  const MeanCurvatureOperator& op_;
  StepperConfig cfg_;
  SparseSolver solver_;
};

/// One accepted step: the step size is halved on a space-like margin breach.
inline FlowState step(const FlowState& state, FlowStepper& stepper) {
  double dt = stepper.max_dt(state.u.values, state.dt);
  while (true) {
    if (dt < 1e-14) throw StepUnderflow("time step underflow at t = " + std::to_string(state.t));
    Eigen::VectorXd u_new;
    double w = 0.0;
    bool ok = false;
    try {
      u_new = state.u.values + stepper.increment(state.u.values, dt);
      ok = stepper.admissible(u_new, &w);
    } catch (const SpacelikeViolation&) {
      ok = false;
    }
    if (ok) {
      FlowState next = state;
      stepper.finish(next, u_new, dt, w);
      const auto& cfg = stepper.config();
      next.dt = cfg.scheme == Scheme::semi_implicit ? std::min(cfg.dt_max, dt * cfg.dt_growth) : dt;
      return next;
    }
    dt *= 0.5;
  }
}

inline FlowState step(const FlowState& state, const MeanCurvatureOperator& op, const StepperConfig& cfg) {
  FlowStepper stepper(op, cfg);
  return step(state, stepper);
}

namespace detail {

inline double lorentz_energy(const MeanCurvatureOperator& op, const Eigen::VectorXd& u) {
  const auto& g = op.grid();
  const Eigen::VectorXd w = op.du2(u);
  double area = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) area += g.node(k).weight * std::sqrt(1.0 - w[k]);
  const Eigen::VectorXd ub = boundary_values(GridFunction(op.grid_ptr(), u));
  return area - boundary_integral(g, ub.cwiseProduct(op.contact_angle().samples()));
}

inline TimeSample sample_state(const MeanCurvatureOperator& op, const FlowState& s,
                               const Eigen::VectorXd& u_prev, double dt,
                               const FlowState* reference) {
  const auto& g = op.grid();
  TimeSample row;
  row.t = s.t;
  row.dt = dt;
  row.sup_ut = s.u_t.values.cwiseAbs().maxCoeff();
  const Eigen::VectorXd w = op.du2(s.u.values);
  row.sup_du2 = w.maxCoeff();
  row.mean_ut = domain_mean(s.u_t);
  const Eigen::VectorXd F = op.apply(s.u.values);
  row.hv_residual = (F - s.u_t.values).cwiseAbs().maxCoeff();
  row.max_H = s.H.values.cwiseAbs().maxCoeff();
  row.u_max = s.u.max();
  row.u_min = s.u.min();
  row.energy = lorentz_energy(op, s.u.values);
  if (dt > 0.0) {
    const Eigen::VectorXd w_prev = op.du2(u_prev);
    double d = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double inv_v = 0.5 * (1.0 / std::sqrt(1.0 - w[k]) + 1.0 / std::sqrt(1.0 - w_prev[k]));
      d += g.node(k).weight * s.u_t[k] * s.u_t[k] * inv_v;
    }
    row.dissipation = d;
  }
  if (reference) {
    const GridFunction diff = s.u - reference->u;
    row.osc_vs_reference = diff.osc();
    row.abs_diff_max = diff.values.cwiseAbs().maxCoeff();
  }
  return row;
}

inline bool speed_converged(const FlowState& s, double tol) {
  const double mean = domain_mean(s.u_t);
  return (s.u_t.values.array() - mean).abs().maxCoeff() < tol;
}

}  // namespace detail

/// Integrates until max |u_t - mean u_t| < tol_speed or t > max_time. With a reference
/// initial datum, both solutions advance in lockstep and osc(u - u_ref) is recorded.
inline FlowRun run_to_convergence(const GridFunction& u0, const MeanCurvatureOperator& op,
                                  const StepperConfig& cfg,
                                  const std::optional<GridFunction>& reference_u0 = std::nullopt) {
  FlowStepper stepper(op, cfg);
  std::optional<FlowStepper> ref_stepper;
  FlowRun run;
  run.state = stepper.initial_state(u0);
  run.sup_du2_initial = run.state.sup_du2;
  run.sup_ut_initial = run.state.sup_ut;
  if (reference_u0) {
    ref_stepper.emplace(op, cfg);
    run.reference = ref_stepper->initial_state(*reference_u0);
  }

  {
    TimeSample row = detail::sample_state(op, run.state, u0.values, 0.0, run.reference ? &*run.reference : nullptr);
    row.dt = 0.0;
    run.series.push_back(row);
  }

  std::size_t next_dense = 0;
  std::vector<double> dense_times = cfg.dense_sample_times;
  std::sort(dense_times.begin(), dense_times.end());
  std::optional<GridFunction> pending_prev;
  double pending_dt_prev = 0.0;
  std::optional<std::pair<GridFunction, double>> pending_mid;  // (u^n, t_n)

  try {
    while (true) {
      const bool done = detail::speed_converged(run.state, cfg.tol_speed) &&
                        (!run.reference || detail::speed_converged(*run.reference, cfg.tol_speed));
      if (done && run.state.step_count > 0) {
        run.converged = true;
        break;
      }
      if (cfg.end_time > 0.0 && run.state.t >= cfg.end_time) {
        run.reached_end_time = true;
        break;
      }
      if (run.state.t > cfg.max_time || run.state.step_count >= cfg.max_steps) {
        run.failure = "no convergence by t = " + std::to_string(run.state.t) + " (max |u_t - mean| = " +
                      std::to_string((run.state.u_t.values.array() - domain_mean(run.state.u_t)).abs().maxCoeff()) +
                      ")";
        break;
      }
      const Eigen::VectorXd u_prev = run.state.u.values;
      FlowState next = step(run.state, stepper);
      double dt = next.t - run.state.t;
      if (run.reference) {
        // keep the reference on the same time levels
        FlowState ref = *run.reference;
        ref.dt = dt;
        FlowState ref_next = step(ref, *ref_stepper);
        while (std::abs(ref_next.t - next.t) > 1e-14 * std::max(1.0, next.t)) {
          // the reference needed a smaller step: redo the primary with it
          const double dt_ref = ref_next.t - ref.t;
          FlowState retry = run.state;
          retry.dt = dt_ref;
          next = step(retry, stepper);
          dt = next.t - run.state.t;
          ref.dt = dt;
          ref_next = step(ref, *ref_stepper);
        }
        next.dt = std::min(next.dt, ref_next.dt);
        ref_next.dt = next.dt;
        run.reference = std::move(ref_next);
      }

      // dense snapshots for the |Du|^2 evolution study
      if (pending_mid) {
        run.dense.push_back({pending_mid->second, pending_dt_prev, dt, *pending_prev, pending_mid->first, next.u});
        pending_mid.reset();
        pending_prev.reset();
      }
      if (next_dense < dense_times.size() && next.t >= dense_times[next_dense]) {
        pending_prev = GridFunction(op.grid_ptr(), u_prev);
        pending_dt_prev = dt;
        pending_mid = std::make_pair(next.u, next.t);
        ++next_dense;
      }

      run.state = std::move(next);
      run.series.push_back(detail::sample_state(op, run.state, u_prev, dt, run.reference ? &*run.reference : nullptr));
    }
  } catch (const Error& e) {
    run.failure = e.what();
  }
  run.speed_estimate = domain_mean(run.state.u_t);
  return run;
}

}  // namespace lmcf
