#pragma once

// Run directories: a manifest.json plus CSV tables that carry the scenario hash.

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include "lmcf/io/csv.hpp"
#include "lmcf/io/scenario.hpp"
#include "lmcf/verification.hpp"

namespace lmcf::io {

namespace fs = std::filesystem;

inline constexpr const char* kToolName = "lmcf";
inline constexpr const char* kToolVersion = "1.0.0";

namespace detail {

inline const std::vector<Column>& series_columns() {
  static const std::vector<Column> cols{
      {"t", "time"},           {"dt", "time"},           {"sup_ut", "length/time"},
      {"sup_du2", "1"},        {"mean_ut", "length/time"}, {"hv_residual", "length/time"},
      {"osc_vs_reference", "length"}, {"abs_diff_max", "length"}, {"energy", "length^2"},
      {"dissipation", "length^2/time"}, {"max_H", "1/length"}, {"u_max", "length"},
      {"u_min", "length"}};
  return cols;
}

inline std::vector<double> series_row(const TimeSample& s) {
  return {s.t,      s.dt,        s.sup_ut,      s.sup_du2,   s.mean_ut,
          s.hv_residual, s.osc_vs_reference, s.abs_diff_max, s.energy,
          s.dissipation, s.max_H, s.u_max, s.u_min};
}

inline TimeSample series_from_row(const Table& t, std::size_t r) {
  const auto& row = t.rows[r];
  auto col = [&](const char* name) { return row[t.column(name)]; };
  TimeSample s;
  s.t = col("t");
  s.dt = col("dt");
  s.sup_ut = col("sup_ut");
  s.sup_du2 = col("sup_du2");
  s.mean_ut = col("mean_ut");
  s.hv_residual = col("hv_residual");
  s.osc_vs_reference = col("osc_vs_reference");
  s.abs_diff_max = col("abs_diff_max");
  s.energy = col("energy");
  s.dissipation = col("dissipation");
  s.max_H = col("max_H");
  s.u_max = col("u_max");
  s.u_min = col("u_min");
  return s;
}

/// Node table: grid indices and chart position followed by the given fields.
inline Table node_table(const std::string& hash, const CurvilinearGrid& g,
                        const std::vector<std::pair<std::string, const Eigen::VectorXd*>>& fields) {
  Table t;
  t.scenario_hash = hash;
  t.columns = {{"i", "1"}, {"j", "1"}, {"x", "length"}, {"y", "length"}};
  for (const auto& f : fields) t.columns.push_back({f.first, "length"});
  for (int i = 0; i < g.n_radial(); ++i) {
    for (int j = 0; j < g.n_angular(); ++j) {
      const std::size_t k = g.index(i, j);
      std::vector<double> row{double(i), double(j), g.node(k).x.x(), g.node(k).x.y()};
      for (const auto& f : fields) row.push_back((*f.second)[static_cast<Eigen::Index>(k)]);
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

inline json monitor_to_json(const MonitorConstants& mc) {
  return {{"c0", mc.c0}, {"kappa0", mc.kappa0}, {"phi0", mc.phi0}, {"phi1", mc.phi1},
          {"phi2", mc.phi2}, {"c2", mc.c2}, {"c1", mc.c1}};
}

inline MonitorConstants monitor_from_json(const json& j) {
  MonitorConstants mc;
  mc.c0 = j.at("c0").get<double>();
  mc.kappa0 = j.at("kappa0").get<double>();
  mc.phi0 = j.at("phi0").get<double>();
  mc.phi1 = j.at("phi1").get<double>();
  mc.phi2 = j.at("phi2").get<double>();
  mc.c2 = j.at("c2").get<double>();
  mc.c1 = j.at("c1").get<double>();
  return mc;
}

inline void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

inline json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw IoError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

inline json base_manifest(const char* kind, const ScenarioInstance& inst, double seconds) {
  return {{"tool", kToolName},
          {"version", kToolVersion},
          {"kind", kind},
          {"scenario_hash", inst.hash},
          {"family_hash", family_hash(inst.scenario)},
          {"scenario", to_json(inst.scenario)},
          {"timing", {{"wall_seconds", seconds}}}};
}

}  // namespace detail

/// Writes a flow run; returns its manifest.
inline json write_flow_run(const fs::path& dir, const ScenarioInstance& inst, const FlowRun& run,
                           const MonitorConstants& mc, double seconds) {
  fs::create_directories(dir);
  const auto& g = *inst.grid;
  Table series;
  series.scenario_hash = inst.hash;
  series.columns = detail::series_columns();
  for (const auto& s : run.series) series.rows.push_back(detail::series_row(s));
  write_table((dir / "timeseries.csv").string(), series);

  std::vector<std::pair<std::string, const Eigen::VectorXd*>> fields{
      {"u0", &inst.u0.values}, {"u", &run.state.u.values}, {"u_t", &run.state.u_t.values}};
  if (run.reference) {
    fields.push_back({"u_ref0", &inst.reference_u0->values});
    fields.push_back({"u_ref", &run.reference->u.values});
  }
  write_table((dir / "nodes.csv").string(), detail::node_table(inst.hash, g, fields));

  json files = {{"timeseries", "timeseries.csv"}, {"nodes", "nodes.csv"}};
  json dense = json::array();
  for (std::size_t k = 0; k < run.dense.size(); ++k) {
    const auto& d = run.dense[k];
    const std::string name = "dense_" + std::to_string(k) + ".csv";
    write_table((dir / name).string(),
                detail::node_table(inst.hash, g, {{"u_prev", &d.u_prev.values}, {"u", &d.u.values},
                                                  {"u_next", &d.u_next.values}}));
    dense.push_back({{"file", name}, {"t", d.t}, {"dt_prev", d.dt_prev}, {"dt_next", d.dt_next}});
  }
  files["dense"] = dense;

  json m = detail::base_manifest("flow", inst, seconds);
  m["files"] = files;
  m["diagnostics"] = {{"converged", run.converged},
                      {"reached_end_time", run.reached_end_time},
                      {"failure", run.failure},
                      {"speed_estimate", run.speed_estimate},
                      {"t_final", run.state.t},
                      {"steps", run.state.step_count},
                      {"h", g.h()},
                      {"n_radial", g.n_radial()},
                      {"n_angular", g.n_angular()},
                      {"sup_du2_initial", run.sup_du2_initial},
                      {"sup_ut_initial", run.sup_ut_initial},
                      {"sup_du2_max", run.state.sup_du2},
                      {"compatible", inst.compatible},
                      {"contact_mismatch", inst.contact_mismatch},
                      {"phi_integral", inst.op->contact_angle().boundary_integral_value()},
                      {"delta_space", inst.scenario.stepper.delta_space},
                      {"has_reference", run.reference.has_value()},
                      {"monitor", detail::monitor_to_json(mc)}};
  detail::write_json(dir / "manifest.json", m);
  return m;
}

/// Writes a translator run; `sol` is empty when the solve failed.
inline json write_translator_run(const fs::path& dir, const ScenarioInstance& inst,
                                 const std::optional<TranslatorSolution>& sol, const std::string& failure,
                                 double seconds) {
  fs::create_directories(dir);
  json m = detail::base_manifest("translator", inst, seconds);
  json diag = {{"converged", sol.has_value()},
               {"failure", failure},
               {"h", inst.grid->h()},
               {"n_radial", inst.grid->n_radial()},
               {"n_angular", inst.grid->n_angular()},
               {"phi_integral", inst.op->contact_angle().boundary_integral_value()},
               {"newton_tolerance", inst.scenario.continuation.newton.tolerance}};
  json files = json::object();
  if (sol) {
    write_table((dir / "profile.csv").string(),
                detail::node_table(inst.hash, *inst.grid, {{"profile", &sol->profile.values}}));
    Table trace;
    trace.scenario_hash = inst.hash;
    trace.columns = {{"eps", "1/time"},
                     {"c3_estimate", "length/time"},
                     {"max_deviation", "length/time"},
                     {"mean_deviation", "length/time"},
                     {"newton_iterations", "1"}};
    for (const auto& e : sol->eps_trace) {
      trace.rows.push_back({e.eps, e.c3_estimate, e.max_deviation, e.mean_deviation, double(e.newton_iterations)});
    }
    write_table((dir / "eps_trace.csv").string(), trace);
    files = {{"profile", "profile.csv"}, {"eps_trace", "eps_trace.csv"}};
    diag["c3"] = sol->c3;
    diag["c3_continuation"] = sol->c3_continuation;
    diag["c3_quadrature"] = sol->c3_quadrature;
    diag["residual_interior"] = sol->residual_interior;
    diag["residual_boundary"] = sol->residual_boundary;
    diag["sup_du2"] = sol->sup_du2;
  }
  m["files"] = files;
  m["diagnostics"] = diag;
  detail::write_json(dir / "manifest.json", m);
  return m;
}

/// A run directory read back from disk, with its scenario re-validated.
struct LoadedRun {
  fs::path dir;
  json manifest;
  std::string kind;
  std::string hash;
  std::string family;
  Scenario scenario;

  const json& diag() const { return manifest.at("diagnostics"); }

  Table table(const std::string& file_key) const {
    const Table t = read_table((dir / manifest.at("files").at(file_key).get<std::string>()).string());
    if (t.scenario_hash != hash) throw IoError((dir / file_key).string() + ": scenario hash does not match manifest");
    return t;
  }

  std::vector<TimeSample> series() const {
    const Table t = table("timeseries");
    std::vector<TimeSample> out;
    for (std::size_t r = 0; r < t.rows.size(); ++r) out.push_back(detail::series_from_row(t, r));
    return out;
  }

  /// Node field in grid index order.
  Eigen::VectorXd node_field(const std::string& file_key, const std::string& column) const {
    return node_field_from(table(file_key), column);
  }

  Eigen::VectorXd node_field_from(const Table& t, const std::string& column) const {
    const auto v = t.values(column);
    const auto n = static_cast<std::size_t>(scenario.n_radial) * scenario.n_angular;
    if (v.size() != n) throw IoError(dir.string() + ": node table has the wrong number of rows");
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
};

inline LoadedRun load_run(const fs::path& dir) {
  LoadedRun r;
  r.dir = dir;
  const fs::path mpath = dir / "manifest.json";
  if (!fs::exists(mpath)) throw IoError("no manifest.json in " + dir.string());
  r.manifest = detail::read_json(mpath);
  try {
    r.kind = r.manifest.at("kind").get<std::string>();
    r.hash = r.manifest.at("scenario_hash").get<std::string>();
    r.scenario = parse_scenario(r.manifest.at("scenario"));
  } catch (const json::exception& e) {
    throw IoError(mpath.string() + ": " + e.what());
  }
  if (scenario_hash(r.scenario) != r.hash) throw IoError(mpath.string() + ": scenario does not match its hash");
  r.family = family_hash(r.scenario);
  for (auto it = r.manifest.at("files").begin(); it != r.manifest.at("files").end(); ++it) {
    std::vector<std::string> names;
    if (it.value().is_string()) names.push_back(it.value().get<std::string>());
    if (it.value().is_array()) {
      for (const auto& e : it.value()) {
        if (e.is_string()) names.push_back(e.get<std::string>());
        if (e.is_object() && e.contains("file")) names.push_back(e.at("file").get<std::string>());
      }
    }
    for (const auto& name : names) {
      if (!fs::exists(dir / name)) throw IoError("missing file " + (dir / name).string());
    }
  }
  return r;
}

}  // namespace lmcf::io
