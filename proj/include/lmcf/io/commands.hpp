#pragma once

// Command implementations behind the command-line tool: flow, translator, verify, sweep.
// Exit codes: 0 pass, 1 check failure or recorded non-convergence, 2 usage or runtime
// error (raised as exceptions and mapped by the caller).

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "lmcf/io/manifest.hpp"

namespace lmcf::io {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitError = 2;

/// Runs the flow (and the reference flow, when configured) and writes the run directory.
inline json run_flow_scenario(const Scenario& sc, const fs::path& out) {
  const auto start = std::chrono::steady_clock::now();
  const ScenarioInstance inst = instantiate(sc);
  const MonitorConstants mc = monitor_constants(inst.u0, *inst.op);
  const FlowRun run = run_to_convergence(inst.u0, *inst.op, sc.stepper, inst.reference_u0);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return write_flow_run(out, inst, run, mc, seconds);
}

inline json run_translator_scenario(const Scenario& sc, const fs::path& out) {
  const auto start = std::chrono::steady_clock::now();
  const ScenarioInstance inst = instantiate(sc);
  std::optional<TranslatorSolution> sol;
  std::string failure;
  try {
    sol = continuation(sc.continuation, *inst.op);
  } catch (const ConvergenceError& e) {
    failure = e.what();
  } catch (const SpacelikeViolation& e) {
    failure = e.what();
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return write_translator_run(out, inst, sol, failure, seconds);
}

inline int cmd_flow(const std::string& config, const fs::path& out, std::ostream& log) {
  const json m = run_flow_scenario(load_scenario(config), out);
  const auto& d = m.at("diagnostics");
  if (d.at("reached_end_time").get<bool>()) {
    log << "flow reached end time t = " << d.at("t_final").get<double>() << '\n';
    return kExitPass;
  }
  if (!d.at("converged").get<bool>()) {
    log << "flow did not converge: " << d.at("failure").get<std::string>() << '\n';
    return kExitFail;
  }
  log << "flow converged at t = " << d.at("t_final").get<double>()
      << ", speed estimate = " << format_number(d.at("speed_estimate").get<double>()) << '\n';
  return kExitPass;
}

inline int cmd_translator(const std::string& config, const fs::path& out, std::ostream& log) {
  const json m = run_translator_scenario(load_scenario(config), out);
  const auto& d = m.at("diagnostics");
  if (!d.at("converged").get<bool>()) {
    log << "translator solve failed: " << d.at("failure").get<std::string>() << '\n';
    return kExitFail;
  }
  log << "c3 = " << format_number(d.at("c3").get<double>()) << '\n';
  return kExitPass;
}

// ---------------------------------------------------------------------------
// verify

struct VerificationResult {
  json report;
  bool pass = true;
  std::string table;
};

namespace detail {

inline json report_to_json(const CheckReport& r) {
  return {{"name", r.name},         {"pass", r.pass},     {"measured", r.measured},
          {"threshold", r.threshold}, {"detail", r.detail}, {"trace", r.trace}};
}

inline void flow_checks(const LoadedRun& run, const std::map<std::string, const LoadedRun*>& translators,
                        std::vector<CheckReport>& out) {
  const auto& d = run.diag();
  const auto series = run.series();
  const double h = d.at("h").get<double>();
  const bool compatible = d.at("compatible").get<bool>();
  MonitorConstants mc = monitor_from_json(d.at("monitor"));

  const bool finished = d.at("reached_end_time").get<bool>();
  CheckReport conv;
  conv.name = "flow_completed";
  conv.pass = d.at("converged").get<bool>() || finished;
  conv.detail = finished ? "stopped at the configured end time" : d.at("failure").get<std::string>();
  out.push_back(conv);

  out.push_back(check_ut_max_principle(series, !compatible));
  out.push_back(check_spacelike_bound(series, mc, d.at("sup_du2_initial").get<double>(), h,
                                      d.at("delta_space").get<double>()));
  if (finished) return;  // limit checks need a run to convergence
  if (d.at("has_reference").get<bool>()) out.push_back(check_osc_decay(series, true));
  const double phi_integral = d.at("phi_integral").get<double>();
  if (std::abs(phi_integral) <= 1e-10) {
    out.push_back(check_maximal_limit(series, phi_integral, h, compatible ? 0.0 : incompatible_transient_window(h)));
  }
  const auto tr = translators.find(run.hash);
  if (tr != translators.end() && tr->second->diag().at("converged").get<bool>()) {
    FlowSummary fs{d.at("speed_estimate").get<double>(), d.at("t_final").get<double>(),
                   run.node_field("nodes", "u"), series};
    CheckReport r = check_translator_agreement(fs, tr->second->diag().at("c3").get<double>(),
                                               tr->second->node_field("profile", "profile"), h, &mc);
    out.push_back(r);
  }
}

inline void translator_checks(const LoadedRun& run, std::vector<CheckReport>& out) {
  const auto& d = run.diag();
  CheckReport conv;
  conv.name = "translator_converged";
  conv.pass = d.at("converged").get<bool>();
  conv.detail = d.at("failure").get<std::string>();
  out.push_back(conv);
  if (!conv.pass) return;
  const double h = d.at("h").get<double>();
  CheckReport res;
  res.name = "translator_residuals";
  const double interior = d.at("residual_interior").get<double>();
  const double boundary = d.at("residual_boundary").get<double>();
  const double quad_gap = std::abs(d.at("c3").get<double>() - d.at("c3_quadrature").get<double>());
  res.measured = std::max({interior / (10.0 * d.at("newton_tolerance").get<double>()), boundary / (5.0 * h * h),
                           quad_gap / (5.0 * h * h)});
  res.threshold = 1.0;
  res.pass = res.measured < 1.0;
  res.detail = "interior " + std::to_string(interior) + ", boundary (one-sided) " + std::to_string(boundary) +
               ", |c3 - quadrature| " + std::to_string(quad_gap);
  out.push_back(res);
  const auto trace = run.table("eps_trace");
  CheckReport cauchy;
  cauchy.name = "eps_trace_monotone";
  const auto eps = trace.values("eps");
  const auto dev = trace.values("mean_deviation");
  cauchy.pass = true;
  for (std::size_t k = 1; k < eps.size(); ++k) {
    if (eps[k] <= 0.25 && dev[k] > dev[k - 1] && dev[k] > 1e-12) {
      cauchy.pass = false;
      cauchy.trace.push_back(k);
    }
  }
  cauchy.measured = dev.empty() ? 0.0 : dev.back();
  cauchy.detail = "|eps mean(u_eps) - c3| nonincreasing for eps <= 0.25";
  out.push_back(cauchy);
}

inline std::vector<DenseSnapshot> load_dense(const LoadedRun& run, const GridPtr& grid) {
  std::vector<DenseSnapshot> snaps;
  for (const auto& e : run.manifest.at("files").at("dense")) {
    const fs::path p = run.dir / e.at("file").get<std::string>();
    if (!fs::exists(p)) throw IoError("missing file " + p.string());
    const Table t = read_table(p.string());
    if (t.scenario_hash != run.hash) throw IoError(p.string() + ": scenario hash does not match manifest");
    snaps.push_back({e.at("t").get<double>(), e.at("dt_prev").get<double>(), e.at("dt_next").get<double>(),
                     GridFunction(grid, run.node_field_from(t, "u_prev")), GridFunction(grid, run.node_field_from(t, "u")),
                     GridFunction(grid, run.node_field_from(t, "u_next"))});
  }
  return snaps;
}

}  // namespace detail

inline VerificationResult verify_runs(const std::vector<fs::path>& dirs) {
  if (dirs.empty()) throw ScenarioError("verify needs at least one run directory");
  std::vector<LoadedRun> runs;
  for (const auto& d : dirs) runs.push_back(load_run(d));
  std::map<std::string, const LoadedRun*> translators;
  for (const auto& r : runs) {
    if (r.kind == "translator") translators[r.hash] = &r;
  }

  VerificationResult res;
  json runs_json = json::array();
  std::ostringstream table;
  table << "run | check | pass | measured | threshold\n";
  auto add_row = [&](const std::string& label, const CheckReport& c) {
    table << label << " | " << c.name << " | " << (c.pass ? "PASS" : "FAIL") << " | " << format_number(c.measured)
          << " | " << format_number(c.threshold) << '\n';
    res.pass = res.pass && c.pass;
  };

  std::map<std::string, std::vector<const LoadedRun*>> families;
  for (const auto& r : runs) {
    std::vector<CheckReport> checks;
    if (r.kind == "flow") {
      detail::flow_checks(r, translators, checks);
      families[r.family].push_back(&r);
    } else if (r.kind == "translator") {
      detail::translator_checks(r, checks);
    } else {
      throw IoError(r.dir.string() + ": unknown run kind '" + r.kind + "'");
    }
    json cj = json::array();
    for (const auto& c : checks) {
      cj.push_back(detail::report_to_json(c));
      add_row(r.dir.filename().string(), c);
    }
    runs_json.push_back({{"dir", r.dir.string()}, {"kind", r.kind}, {"scenario_hash", r.hash}, {"checks", cj}});
  }

  // refinement studies over runs of one family at several resolutions
  json studies = json::array();
  std::optional<std::set<std::string>> validating;
  for (const auto& [family, members] : families) {
    std::map<double, const LoadedRun*> by_h;
    for (const auto* r : members) by_h[r->diag().at("h").get<double>()] = r;
    if (by_h.size() < 2) continue;

    std::vector<SpacelikeLevel> levels;
    for (const auto& [h, r] : by_h) {
      const auto& d = r->diag();
      const double c1 = d.at("monitor").at("c1").get<double>();
      levels.push_back({h, d.at("sup_du2_max").get<double>(), std::max(d.at("sup_du2_initial").get<double>(), c1)});
    }
    const CheckReport sl = check_spacelike_refinement(levels);
    add_row("family " + family, sl);
    studies.push_back({{"family", family}, {"kind", "spacelike_refinement"}, {"report", detail::report_to_json(sl)}});

    std::vector<EvoDuStudy> evo;
    for (const auto& [h, r] : by_h) {
      if (r->manifest.at("files").at("dense").empty()) continue;
      const ScenarioInstance inst = instantiate(r->scenario);
      evo.push_back(evo_du_residuals(*inst.op, detail::load_dense(*r, inst.grid)));
    }
    if (evo.size() >= 2) {
      const EvoDuVerdict v = check_evo_du_residual(evo);
      add_row("family " + family, v.report);
      json resid = json::object();
      for (const auto& s : evo) {
        for (const auto& [name, value] : s.residual) resid[name].push_back(value);
      }
      json hs = json::array();
      for (const auto& s : evo) hs.push_back(s.h);
      studies.push_back({{"family", family},
                         {"kind", "evo_du"},
                         {"h", hs},
                         {"residuals", resid},
                         {"observed_order", v.observed_order},
                         {"converging", v.converging},
                         {"report", detail::report_to_json(v.report)}});
      std::set<std::string> conv(v.converging.begin(), v.converging.end());
      if (!validating) {
        validating = conv;
      } else {
        std::set<std::string> both;
        for (const auto& c : conv) {
          if (validating->count(c)) both.insert(c);
        }
        validating = both;
      }
    }
  }

  res.report = {{"tool", kToolName}, {"version", kToolVersion}, {"runs", runs_json}, {"studies", studies}};
  if (validating) {
    res.report["evo_du_validating_conventions"] = std::vector<std::string>(validating->begin(), validating->end());
    table << "evo-du conventions converging in every study:";
    for (const auto& c : *validating) table << ' ' << c;
    table << '\n';
  }
  res.report["pass"] = res.pass;
  res.table = table.str();
  return res;
}

inline int cmd_verify(const std::vector<fs::path>& dirs, const fs::path& out, std::ostream& log) {
  const VerificationResult v = verify_runs(dirs);
  fs::create_directories(out);
  detail::write_json(out / "verification_report.json", v.report);
  {
    std::ofstream t(out / "verification_summary.txt", std::ios::binary);
    t << v.table;
  }
  log << v.table;
  return v.pass ? kExitPass : kExitFail;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepAxis {
  std::string key;  ///< "resolution" or a JSON pointer into the scenario
  std::vector<double> values;
};

/// "key=v1,v2;key2=w1,w2" into axes; the sweep is their Cartesian product.
inline std::vector<SweepAxis> parse_grid_spec(const std::string& spec) {
  std::vector<SweepAxis> axes;
  std::istringstream in(spec);
  std::string part;
  while (std::getline(in, part, ';')) {
    if (part.empty()) continue;
    const auto eq = part.find('=');
    if (eq == std::string::npos || eq == 0) throw ScenarioError("bad sweep axis '" + part + "', expected key=v1,v2");
    SweepAxis a;
    a.key = part.substr(0, eq);
    if (a.key != "resolution" && a.key.front() != '/') {
      throw ScenarioError("sweep key must be 'resolution' or a JSON pointer, got '" + a.key + "'");
    }
    std::istringstream vs(part.substr(eq + 1));
    std::string v;
    while (std::getline(vs, v, ',')) {
      char* end = nullptr;
      const double x = std::strtod(v.c_str(), &end);
      if (v.empty() || *end != '\0') throw ScenarioError("bad sweep value '" + v + "'");
      a.values.push_back(x);
    }
    if (a.values.empty()) throw ScenarioError("sweep axis '" + a.key + "' has no values");
    axes.push_back(std::move(a));
  }
  if (axes.empty()) throw ScenarioError("empty sweep grid");
  return axes;
}

/// Worker count from LMCF_WORKERS (default 1).
inline int worker_count() {
  const char* env = std::getenv("LMCF_WORKERS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1 || n > 1024) throw ScenarioError(std::string("invalid LMCF_WORKERS '") + env + "'");
  return static_cast<int>(n);
}

enum class SweepMode { translator, flow };

inline json apply_sweep_point(json scenario, const std::vector<SweepAxis>& axes, const std::vector<double>& point) {
  for (std::size_t a = 0; a < axes.size(); ++a) {
    if (axes[a].key == "resolution") {
      const int n = static_cast<int>(point[a]);
      scenario["grid"]["n_radial"] = n;
      scenario["grid"]["n_angular"] = 2 * n;
    } else {
      try {
        scenario[json::json_pointer(axes[a].key)] = point[a];
      } catch (const json::exception& e) {
        throw ScenarioError("bad JSON pointer '" + axes[a].key + "': " + e.what());
      }
    }
  }
  return scenario;
}

/// Runs every point of the grid and writes summary.csv; returns the exit code.
inline int cmd_sweep(const std::string& template_path, const std::string& grid_spec, SweepMode mode,
                     const fs::path& out, int workers, std::ostream& log) {
  const auto axes = parse_grid_spec(grid_spec);
  const json base = to_json(load_scenario(template_path));
  std::vector<std::vector<double>> points{{}};
  for (const auto& a : axes) {
    std::vector<std::vector<double>> next;
    for (const auto& p : points) {
      for (double v : a.values) {
        auto q = p;
        q.push_back(v);
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  // validate every point before running any of them
  std::vector<Scenario> scenarios;
  for (const auto& p : points) scenarios.push_back(parse_scenario(apply_sweep_point(base, axes, p)));

  fs::create_directories(out);
  struct Outcome {
    bool ok = false;
    double h = 0, quantity = 0, sup_du2 = 0;
    std::string hash, error;
  };
  std::vector<Outcome> outcomes(points.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < points.size();) {
      char name[32];
      std::snprintf(name, sizeof name, "point_%03zu", k);
      Outcome& o = outcomes[k];
      try {
        const json m = mode == SweepMode::translator ? run_translator_scenario(scenarios[k], out / name)
                                                     : run_flow_scenario(scenarios[k], out / name);
        const auto& d = m.at("diagnostics");
        o.hash = m.at("scenario_hash").get<std::string>();
        o.h = d.at("h").get<double>();
        o.ok = d.at("converged").get<bool>() || (d.contains("reached_end_time") && d.at("reached_end_time").get<bool>());
        if (o.ok) {
          o.quantity = mode == SweepMode::translator ? d.at("c3").get<double>() : d.at("speed_estimate").get<double>();
          o.sup_du2 = mode == SweepMode::translator ? d.at("sup_du2").get<double>() : d.at("sup_du2_max").get<double>();
        } else {
          o.error = d.at("failure").get<std::string>();
        }
      } catch (const std::exception& e) {
        o.error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  const int n_threads = std::max(1, std::min<int>(workers, static_cast<int>(points.size())));
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  Table summary;
  summary.scenario_hash = hash_text(base.dump() + "|" + grid_spec);
  summary.columns = {{"point", "1"}};
  for (const auto& a : axes) summary.columns.push_back({a.key, "1"});
  const char* qname = mode == SweepMode::translator ? "c3" : "speed_estimate";
  summary.columns.insert(summary.columns.end(),
                         {{"h", "length"}, {qname, "length/time"}, {"sup_du2", "1"}, {"ok", "1"}, {"observed_order", "1"}});
  const bool refinement = axes.size() == 1 && axes[0].key == "resolution";
  bool all_ok = true;
  json index = json::array();
  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto& o = outcomes[k];
    all_ok = all_ok && o.ok;
    double order = std::numeric_limits<double>::quiet_NaN();
    if (refinement && k >= 2 && o.ok && outcomes[k - 1].ok && outcomes[k - 2].ok) {
      // Richardson estimate from three successive resolutions
      const double d1 = std::abs(outcomes[k - 2].quantity - outcomes[k - 1].quantity);
      const double d2 = std::abs(outcomes[k - 1].quantity - o.quantity);
      if (d1 > 0 && d2 > 0) order = std::log(d1 / d2) / std::log(outcomes[k - 2].h / outcomes[k - 1].h);
    }
    std::vector<double> row{double(k)};
    row.insert(row.end(), points[k].begin(), points[k].end());
    row.insert(row.end(), {o.h, o.quantity, o.sup_du2, o.ok ? 1.0 : 0.0, order});
    summary.rows.push_back(std::move(row));
    char name[32];
    std::snprintf(name, sizeof name, "point_%03zu", k);
    index.push_back({{"point", k}, {"dir", name}, {"scenario_hash", o.hash}, {"ok", o.ok}, {"error", o.error}});
    log << name << (o.ok ? " ok " : " FAILED ") << qname << " = " << format_number(o.quantity)
        << (o.error.empty() ? "" : " (" + o.error + ")") << '\n';
  }
  write_table((out / "summary.csv").string(), summary);
  detail::write_json(out / "summary.json", {{"template", base}, {"grid", grid_spec}, {"points", index}});
  return all_ok ? kExitPass : kExitFail;
}

}  // namespace lmcf::io
