#pragma once

// Executable checks of the flow's quantitative invariants over recorded runs.
// Every check is a pure function of its inputs.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "lmcf/flow.hpp"
#include "lmcf/translator.hpp"

namespace lmcf {

struct MonitorConstants {
  double c0 = 0;      ///< sup over the initial slice of |u_t|^2
  double kappa0 = 0;
  double phi0 = 0, phi1 = 0, phi2 = 0;
  double c2 = 0;
  double c1 = 0;      ///< space-like bound
  double c8 = std::numeric_limits<double>::quiet_NaN();  ///< measured drift bound, filled by check_translator_agreement
};

struct CheckReport {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
  std::vector<std::size_t> trace;  ///< offending time-series rows
};

/// c1 = (sqrt(c2^4 + 4 c2^2 kappa0^2) - c2^2) / (2 kappa0^2), evaluated without cancellation.
inline double space_like_bound(double c2, double kappa0) {
  if (!(kappa0 > 0.0)) throw ScenarioError("space_like_bound needs kappa0 > 0");
  if (c2 == 0.0) return 0.0;
  const double c2sq = c2 * c2;
  return 2.0 * c2sq / (std::sqrt(c2sq * c2sq + 4.0 * c2sq * kappa0 * kappa0) + c2sq);
}

/// c0 from the discrete flow operator at t = 0; c2 = Phi sqrt(c0) + 3 phi2 with
/// Phi = max(|phi0|, |phi1|).
inline MonitorConstants monitor_constants(const GridFunction& u0, const MeanCurvatureOperator& op) {
  MonitorConstants mc;
  mc.kappa0 = op.grid().domain().kappa0();
  if (!(mc.kappa0 > 0.0)) throw ScenarioError("monitor_constants needs kappa0 > 0");
  const auto& phi = op.contact_angle();
  mc.phi0 = phi.phi0();
  mc.phi1 = phi.phi1();
  mc.phi2 = phi.phi2();
  const Eigen::VectorXd ut = op.apply(u0.values);
  const double sup = ut.cwiseAbs().maxCoeff();
  mc.c0 = sup * sup;
  const double big_phi = std::max(std::abs(mc.phi0), std::abs(mc.phi1));
  mc.c2 = big_phi * std::sqrt(mc.c0) + 3.0 * mc.phi2;
  mc.c1 = space_like_bound(mc.c2, mc.kappa0);
  return mc;
}

/// sup |u_t|(t) <= sup |u_t|(0) (1 + 1e-6) + 1e-8 for all t, and step to step
/// nonincreasing within 1e-8 per unit time. With `skip_initial_transient`, row 0
/// (incompatible initial data) is excluded and row 1 becomes the reference.
inline CheckReport check_ut_max_principle(const std::vector<TimeSample>& series,
                                          bool skip_initial_transient = false) {
  CheckReport r;
  r.name = "ut_max_principle";
  const std::size_t first = skip_initial_transient ? 1 : 0;
  if (series.size() <= first) {
    r.detail = "time series too short";
    return r;
  }
  const double ref = series[first].sup_ut;
  r.threshold = ref * (1.0 + 1e-6) + 1e-8;
  double worst_excess = 0.0;
  for (std::size_t n = first; n < series.size(); ++n) {
    r.measured = std::max(r.measured, series[n].sup_ut);
    bool bad = series[n].sup_ut > r.threshold;
    if (n > first) {
      const double allowed = series[n - 1].sup_ut + 1e-8 * (series[n].t - series[n - 1].t);
      worst_excess = std::max(worst_excess, series[n].sup_ut - series[n - 1].sup_ut);
      bad = bad || series[n].sup_ut > allowed;
    }
    if (bad) r.trace.push_back(n);
  }
  r.pass = r.trace.empty();
  r.detail = "largest step-to-step increase " + std::to_string(worst_excess);
  return r;
}

/// sup |Du|^2(t) <= max(sup |Du_0|^2, c1) + 5 h^2 and < 1 - delta_space for all t.
inline CheckReport check_spacelike_bound(const std::vector<TimeSample>& series, const MonitorConstants& mc,
                                         double sup_du2_initial, double h, double delta_space) {
  CheckReport r;
  r.name = "spacelike_bound";
  r.threshold = std::min(std::max(sup_du2_initial, mc.c1) + 5.0 * h * h, 1.0 - delta_space);
  for (std::size_t n = 0; n < series.size(); ++n) {
    const double w = series[n].sup_du2;
    r.measured = std::max(r.measured, w);
    if (!(w <= std::max(sup_du2_initial, mc.c1) + 5.0 * h * h) || !(w < 1.0 - delta_space)) r.trace.push_back(n);
  }
  r.pass = !series.empty() && r.trace.empty();
  r.detail = "c1 = " + std::to_string(mc.c1) + ", sup|Du0|^2 = " + std::to_string(sup_du2_initial);
  return r;
}

/// osc(u - u_ref) nonincreasing within 1e-8, final osc <= 1e-4 initial osc, and
/// max |u - u_ref| never exceeds its initial value (within 1e-8).
inline CheckReport check_osc_decay(const std::vector<TimeSample>& series, bool has_reference) {
  if (series.empty() || !has_reference) {
    throw ScenarioError("check_osc_decay needs a paired run with a reference solution");
  }
  CheckReport r;
  r.name = "osc_decay";
  const double osc0 = series.front().osc_vs_reference;
  for (std::size_t n = 1; n < series.size(); ++n) {
    const bool up = series[n].osc_vs_reference > series[n - 1].osc_vs_reference + 1e-8;
    const bool above = series[n].abs_diff_max > series.front().abs_diff_max + 1e-8;
    if (up || above) r.trace.push_back(n);
  }
  r.measured = series.back().osc_vs_reference;
  r.threshold = 1e-4 * osc0;
  r.pass = r.trace.empty() && r.measured <= r.threshold;
  r.detail = "initial osc " + std::to_string(osc0) + ", final osc " + std::to_string(r.measured);
  return r;
}

/// One resolution of a space-like refinement study.
struct SpacelikeLevel {
  double h = 0.0;
  double sup_du2 = 0.0;  ///< max over the run of sup |Du|^2
  double bound = 0.0;    ///< max(sup |Du0|^2, c1)
};

inline double spacelike_excess(const SpacelikeLevel& l) { return std::max(0.0, l.sup_du2 - l.bound); }

/// The excess of sup |Du|^2 over max(sup |Du0|^2, c1) must vanish or shrink at
/// order >= 2 between the two finest resolutions.
inline CheckReport check_spacelike_refinement(std::vector<SpacelikeLevel> levels) {
  if (levels.size() < 2) throw ScenarioError("check_spacelike_refinement needs at least two resolutions");
  std::sort(levels.begin(), levels.end(), [](const auto& a, const auto& b) { return a.h > b.h; });
  CheckReport r;
  r.name = "spacelike_refinement";
  r.threshold = 2.0;
  const auto& coarse = levels[levels.size() - 2];
  const auto& fine = levels.back();
  const double ec = spacelike_excess(coarse), ef = spacelike_excess(fine);
  r.detail = "excess by level:";
  for (const auto& l : levels) r.detail += " " + std::to_string(spacelike_excess(l));
  if (ef == 0.0) {
    r.pass = true;
    r.measured = std::numeric_limits<double>::infinity();
    r.detail += " (no excess at the finest level)";
    return r;
  }
  r.measured = ec > 0.0 ? std::log(ec / ef) / std::log(coarse.h / fine.h) : -std::numeric_limits<double>::infinity();
  r.pass = r.measured >= r.threshold;
  return r;
}

/// Data of a finished flow run needed to compare with a translator.
struct FlowSummary {
  double speed_estimate = 0.0;
  double t_final = 0.0;
  Eigen::VectorXd u_final;
  std::vector<TimeSample> series;
};

inline FlowSummary summarize(const FlowRun& run) {
  return {run.speed_estimate, run.state.t, run.state.u.values, run.series};
}

/// (a) |speed - c3| < max(1e-4, 5 h^2); (b) u(T) - c3 T matches the profile up to a
/// constant within 1e-3 in max norm; (c) the drift max |u - c3 t| stays bounded.
/// The measured drift bound is written to `mc.c8` when given.
inline CheckReport check_translator_agreement(const FlowSummary& flow, double c3, const Eigen::VectorXd& profile,
                                              double h, MonitorConstants* mc = nullptr) {
  CheckReport r;
  r.name = "translator_agreement";
  const double speed_gap = std::abs(flow.speed_estimate - c3);
  const double speed_tol = std::max(1e-4, 5.0 * h * h);
  Eigen::VectorXd diff = flow.u_final - profile;
  diff.array() -= c3 * flow.t_final;
  const double shift = 0.5 * (diff.maxCoeff() + diff.minCoeff());
  const double shape_gap = (diff.array() - shift).abs().maxCoeff();

  double c8 = 0.0;
  std::vector<double> drift(flow.series.size());
  for (std::size_t n = 0; n < flow.series.size(); ++n) {
    const auto& row = flow.series[n];
    drift[n] = std::max(std::abs(row.u_max - c3 * row.t), std::abs(row.u_min - c3 * row.t));
    c8 = std::max(c8, drift[n]);
  }
  bool drift_bounded = std::isfinite(c8);
  if (!flow.series.empty()) {
    // drift must have settled over the last quarter of the run
    const double t_q = 0.75 * flow.series.back().t;
    std::size_t q = 0;
    while (q + 1 < flow.series.size() && flow.series[q].t < t_q) ++q;
    drift_bounded = drift_bounded && std::abs(drift.back() - drift[q]) < 1e-3;
  }
  if (mc) mc->c8 = c8;

  r.pass = speed_gap < speed_tol && shape_gap < 1e-3 && drift_bounded;
  r.measured = std::max(speed_gap / speed_tol, shape_gap / 1e-3);
  r.threshold = 1.0;
  r.detail = "speed gap " + std::to_string(speed_gap) + " (tol " + std::to_string(speed_tol) + "), profile gap " +
             std::to_string(shape_gap) + ", c8 = " + std::to_string(c8) +
             (drift_bounded ? "" : " (drift not settled)");
  return r;
}

inline CheckReport check_translator_agreement(const FlowSummary& flow, const TranslatorSolution& tr, double h,
                                              MonitorConstants* mc = nullptr) {
  return check_translator_agreement(flow, tr.c3, tr.profile.values, h, mc);
}

/// Per-step tolerance on the discrete energy identity, C (dt^2 + h^2).
inline constexpr double kEnergyIdentityConstant = 1.0;

/// Start-up window excluded from per-step checks when u0 violates the contact
/// condition: the boundary layer it creates is a few cell diffusion times long.
inline double incompatible_transient_window(double h) { return 25.0 * h * h; }

/// For int phi = 0: final max |H| < 5e-3 and
/// |E(t_n) - E(t_{n-1}) - dt_n int u_t^2 / v| <= C (dt_n^2 + h^2) per step,
/// E = int v - int_{boundary} u phi. Steps ending at t <= skip_until are not checked.
inline CheckReport check_maximal_limit(const std::vector<TimeSample>& series, double phi_integral, double h,
                                       double skip_until = 0.0) {
  if (std::abs(phi_integral) > 1e-10) {
    throw ScenarioError("check_maximal_limit applies only when the boundary integral of phi vanishes");
  }
  CheckReport r;
  r.name = "maximal_limit";
  if (series.size() < 2) {
    r.detail = "time series too short";
    return r;
  }
  double worst_ratio = 0.0;
  for (std::size_t n = 1; n < series.size(); ++n) {
    if (series[n].t <= skip_until) continue;
    const double dt = series[n].t - series[n - 1].t;
    const double res = std::abs(series[n].energy - series[n - 1].energy - dt * series[n].dissipation);
    const double tol = kEnergyIdentityConstant * (dt * dt + h * h);
    worst_ratio = std::max(worst_ratio, res / tol);
    if (res > tol) r.trace.push_back(n);
  }
  r.measured = series.back().max_H;
  r.threshold = 5e-3;
  r.pass = r.trace.empty() && r.measured < r.threshold;
  r.detail = "final max|H| " + std::to_string(r.measured) + ", worst energy residual / tolerance " +
             std::to_string(worst_ratio);
  return r;
}

// ---------------------------------------------------------------------------
// |Du|^2 evolution identity

/// Max residual of each convention over interior nodes and snapshots of one run.
struct EvoDuStudy {
  double h = 0.0;
  double dt = 0.0;
  std::map<std::string, double> residual;  ///< convention name -> max residual
};

/// Residual d/dt |Du|^2 - rhs on nodes with rho in [rho_min, rho_max].
inline EvoDuStudy evo_du_residuals(const MeanCurvatureOperator& op, const std::vector<DenseSnapshot>& snaps,
                                   double rho_min = 0.15, double rho_max = 0.75) {
  if (snaps.empty()) throw ScenarioError("evo_du_residuals needs dense snapshots");
  const auto& g = op.grid();
  EvoDuStudy study;
  study.h = g.h();
  for (const auto& c : kEvoDuConventions) study.residual[std::string(c.name)] = 0.0;
  for (const auto& snap : snaps) {
    study.dt = std::max(study.dt, std::max(snap.dt_prev, snap.dt_next));
    const Eigen::VectorXd w_prev = op.du2(snap.u_prev.values);
    const Eigen::VectorXd w_next = op.du2(snap.u_next.values);
    const Eigen::VectorXd w = op.du2(snap.u.values);
    const Eigen::VectorXd gh = op.ghosts(snap.u.values);
    const double span = snap.dt_prev + snap.dt_next;
    for (int i = 0; i < g.n_radial() - 2; ++i) {
      if (g.rho(i) < rho_min || g.rho(i) > rho_max) continue;
      for (int j = 0; j < g.n_angular(); ++j) {
        const std::size_t k = g.index(i, j);
        const MetricSample& m = g.node(k).metric;
        const auto du = op.partials(snap.u.values, gh, i, j);
        const auto dw = op.interior_partials(w, i, j);
        EvoDuInputs in{du.grad, covariant_hessian(du, m), dw.grad, covariant_hessian(dw, m)};
        const double dwdt = (w_next[k] - w_prev[k]) / span;
        for (const auto& c : kEvoDuConventions) {
          auto& slot = study.residual[std::string(c.name)];
          slot = std::max(slot, std::abs(dwdt - evo_du_rhs(in, m, c)));
        }
      }
    }
  }
  return study;
}

/// Minimum observed order for a convention to count as converging.
inline constexpr double kEvoDuMinOrder = 1.5;

struct EvoDuVerdict {
  CheckReport report;
  std::vector<std::string> converging;           ///< conventions whose residual converges
  std::map<std::string, double> observed_order;  ///< between the two finest studies
};

/// Needs studies at two or more resolutions of one scenario.
inline EvoDuVerdict check_evo_du_residual(std::vector<EvoDuStudy> studies) {
  if (studies.size() < 2) throw ScenarioError("check_evo_du_residual needs at least two resolutions");
  std::sort(studies.begin(), studies.end(), [](const auto& a, const auto& b) { return a.h > b.h; });
  EvoDuVerdict v;
  v.report.name = "evo_du_residual";
  const auto& coarse = studies[studies.size() - 2];
  const auto& fine = studies.back();
  for (const auto& c : kEvoDuConventions) {
    const std::string name(c.name);
    const double rc = coarse.residual.at(name), rf = fine.residual.at(name);
    const double order = std::log(rc / rf) / std::log(coarse.h / fine.h);
    v.observed_order[name] = order;
    if (order >= kEvoDuMinOrder) v.converging.push_back(name);
  }
  v.report.pass = !v.converging.empty();
  v.report.threshold = kEvoDuMinOrder;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& [name, p] : v.observed_order) best = std::max(best, p);
  v.report.measured = best;
  v.report.detail = "converging:";
  for (const auto& n : v.converging) v.report.detail += " " + n;
  return v;
}

}  // namespace lmcf
