#pragma once

// Scenario configuration: one JSON document per scenario.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lmcf/flow.hpp"
#include "lmcf/translator.hpp"

namespace lmcf::io {

using nlohmann::json;

enum class U0Kind { constant, polynomial, table };

struct Monomial {
  double coef = 0.0;
  int px = 0;  ///< power of the first chart coordinate
  int py = 0;
};

struct U0Spec {
  U0Kind kind = U0Kind::constant;
  double value = 0.0;
  std::vector<Monomial> terms;
  std::vector<double> table;  ///< node values in grid index order
};

struct Scenario {
  std::string name;
  Metric metric;
  DomainSpec domain;
  PhiSpec phi;
  U0Spec u0;
  std::optional<U0Spec> reference_u0;
  int n_radial = 32;
  int n_angular = 64;
  StepperConfig stepper;
  ContinuationSchedule continuation;
  std::string seed_label;
};

namespace detail {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("bad value for '") + key + "': " + e.what());
  }
}

inline void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ScenarioError(where + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) throw ScenarioError("unknown key '" + it.key() + "' in " + where);
  }
}

inline DomainKind domain_kind_from_string(const std::string& s) {
  if (s == "disk") return DomainKind::disk;
  if (s == "ellipse") return DomainKind::ellipse;
  if (s == "perturbed_disk") return DomainKind::perturbed_disk;
  throw ScenarioError("unknown domain kind '" + s + "'");
}

inline const char* to_string(DomainKind k) {
  switch (k) {
    case DomainKind::disk: return "disk";
    case DomainKind::ellipse: return "ellipse";
    case DomainKind::perturbed_disk: return "perturbed_disk";
  }
  return "?";
}

inline U0Spec parse_u0(const json& j, const std::string& where) {
  reject_unknown(j, {"kind", "value", "terms", "values"}, where);
  U0Spec u;
  const auto kind = get_or<std::string>(j, "kind", "constant");
  if (kind == "constant") {
    u.kind = U0Kind::constant;
    u.value = get_or(j, "value", 0.0);
  } else if (kind == "polynomial") {
    u.kind = U0Kind::polynomial;
    for (const auto& t : j.value("terms", json::array())) {
      reject_unknown(t, {"coef", "px", "py"}, where + ".terms");
      Monomial m{get_or(t, "coef", 0.0), get_or(t, "px", 0), get_or(t, "py", 0)};
      if (m.px < 0 || m.py < 0) throw ScenarioError(where + ": negative monomial power");
      u.terms.push_back(m);
    }
  } else if (kind == "table") {
    u.kind = U0Kind::table;
    u.table = get_or(j, "values", std::vector<double>{});
  } else {
    throw ScenarioError("unknown " + where + " kind '" + kind + "'");
  }
  return u;
}

inline json u0_to_json(const U0Spec& u) {
  switch (u.kind) {
    case U0Kind::constant: return {{"kind", "constant"}, {"value", u.value}};
    case U0Kind::polynomial: {
      json terms = json::array();
      for (const auto& m : u.terms) terms.push_back({{"coef", m.coef}, {"px", m.px}, {"py", m.py}});
      return {{"kind", "polynomial"}, {"terms", terms}};
    }
    case U0Kind::table: return {{"kind", "table"}, {"values", u.table}};
  }
  return {};
}

}  // namespace detail

/// Parses and checks field-level consistency. Geometric admissibility is checked by
/// `instantiate`.
inline Scenario parse_scenario(const json& j) {
  using namespace detail;
  reject_unknown(j, {"name", "metric", "domain", "phi", "u0", "reference_u0", "grid", "stepper", "continuation",
                     "seed_label"},
                 "scenario");
  Scenario sc;
  sc.name = get_or<std::string>(j, "name", "");
  sc.seed_label = get_or<std::string>(j, "seed_label", "");

  const json metric = j.value("metric", json::object());
  reject_unknown(metric, {"id", "param"}, "metric");
  sc.metric.kind = metric_kind_from_string(get_or<std::string>(metric, "id", "flat"));
  sc.metric.param = get_or(metric, "param", 1.0);

  const json dom = j.value("domain", json::object());
  reject_unknown(dom, {"kind", "radius", "a", "b", "amplitude", "mode", "center"}, "domain");
  sc.domain.kind = domain_kind_from_string(get_or<std::string>(dom, "kind", "disk"));
  sc.domain.radius = get_or(dom, "radius", 1.0);
  sc.domain.a = get_or(dom, "a", 1.0);
  sc.domain.b = get_or(dom, "b", 1.0);
  sc.domain.amplitude = get_or(dom, "amplitude", 0.0);
  sc.domain.mode = get_or(dom, "mode", 2);
  const auto center = get_or(dom, "center", std::vector<double>{0.0, 0.0});
  if (center.size() != 2) throw ScenarioError("domain.center must have two entries");
  sc.domain.center = Vec2(center[0], center[1]);

  const json phi = j.value("phi", json::object());
  reject_unknown(phi, {"kind", "value", "cos", "sin", "values"}, "phi");
  const auto phi_kind = get_or<std::string>(phi, "kind", "constant");
  if (phi_kind == "constant") {
    sc.phi.kind = PhiKind::constant;
  } else if (phi_kind == "fourier") {
    sc.phi.kind = PhiKind::fourier;
  } else if (phi_kind == "table") {
    sc.phi.kind = PhiKind::table;
  } else {
    throw ScenarioError("unknown phi kind '" + phi_kind + "'");
  }
  sc.phi.value = get_or(phi, "value", 0.0);
  sc.phi.cos_coefs = get_or(phi, "cos", std::vector<double>{});
  sc.phi.sin_coefs = get_or(phi, "sin", std::vector<double>{});
  sc.phi.table = get_or(phi, "values", std::vector<double>{});

  sc.u0 = parse_u0(j.value("u0", json::object()), "u0");
  if (j.contains("reference_u0") && !j.at("reference_u0").is_null()) {
    sc.reference_u0 = parse_u0(j.at("reference_u0"), "reference_u0");
  }

  const json grid = j.value("grid", json::object());
  reject_unknown(grid, {"n_radial", "n_angular"}, "grid");
  sc.n_radial = get_or(grid, "n_radial", 32);
  sc.n_angular = get_or(grid, "n_angular", 2 * sc.n_radial);

  const json st = j.value("stepper", json::object());
  reject_unknown(st, {"scheme", "dt", "cfl", "dt_growth", "dt_max", "tol_speed", "max_time", "end_time", "delta_space", "max_steps",
                      "dense_sample_times"},
                 "stepper");
  const auto scheme = get_or<std::string>(st, "scheme", "semi_implicit");
  if (scheme == "semi_implicit") {
    sc.stepper.scheme = Scheme::semi_implicit;
  } else if (scheme == "explicit") {
    sc.stepper.scheme = Scheme::explicit_euler;
  } else {
    throw ScenarioError("unknown stepper scheme '" + scheme + "'");
  }
  const StepperConfig defaults;
  sc.stepper.dt = get_or(st, "dt", defaults.dt);
  sc.stepper.cfl = get_or(st, "cfl", defaults.cfl);
  sc.stepper.dt_growth = get_or(st, "dt_growth", defaults.dt_growth);
  sc.stepper.dt_max = get_or(st, "dt_max", defaults.dt_max);
  sc.stepper.tol_speed = get_or(st, "tol_speed", defaults.tol_speed);
  sc.stepper.max_time = get_or(st, "max_time", defaults.max_time);
  sc.stepper.end_time = get_or(st, "end_time", defaults.end_time);
  sc.stepper.delta_space = get_or(st, "delta_space", defaults.delta_space);
  sc.stepper.max_steps = get_or(st, "max_steps", defaults.max_steps);
  sc.stepper.dense_sample_times = get_or(st, "dense_sample_times", std::vector<double>{});
  sc.stepper.validate();

  const json co = j.value("continuation", json::object());
  reject_unknown(co, {"eps0", "ratio", "eps_min", "newton"}, "continuation");
  sc.continuation.eps0 = get_or(co, "eps0", 1.0);
  sc.continuation.ratio = get_or(co, "ratio", 0.5);
  sc.continuation.eps_min = get_or(co, "eps_min", 1e-6);
  const json nw = co.value("newton", json::object());
  reject_unknown(nw, {"max_iterations", "tolerance", "min_damping"}, "continuation.newton");
  sc.continuation.newton.max_iterations = get_or(nw, "max_iterations", 60);
  sc.continuation.newton.tolerance = get_or(nw, "tolerance", 1e-9);
  sc.continuation.newton.min_damping = get_or(nw, "min_damping", 1.0 / 1024.0);
  sc.continuation.validate();

  if (sc.n_radial < 8 || sc.n_angular < 16 || sc.n_angular % 2 != 0) {
    throw ScenarioError("grid needs n_radial >= 8 and an even n_angular >= 16");
  }
  if (sc.phi.kind == PhiKind::table && static_cast<int>(sc.phi.table.size()) != sc.n_angular) {
    throw ScenarioError("phi table has " + std::to_string(sc.phi.table.size()) + " entries, grid has n_angular = " +
                        std::to_string(sc.n_angular));
  }
  const auto n_nodes = static_cast<std::size_t>(sc.n_radial) * sc.n_angular;
  for (const auto* u : {&sc.u0, sc.reference_u0 ? &*sc.reference_u0 : nullptr}) {
    if (u && u->kind == U0Kind::table && u->table.size() != n_nodes) {
      throw ScenarioError("u0 table length does not match the grid");
    }
  }
  return sc;
}

/// Canonical form with every default filled in.
inline json to_json(const Scenario& sc) {
  using namespace detail;
  json j;
  j["name"] = sc.name;
  j["metric"] = {{"id", to_string(sc.metric.kind)}, {"param", sc.metric.param}};
  j["domain"] = {{"kind", to_string(sc.domain.kind)},
                 {"radius", sc.domain.radius},
                 {"a", sc.domain.a},
                 {"b", sc.domain.b},
                 {"amplitude", sc.domain.amplitude},
                 {"mode", sc.domain.mode},
                 {"center", {sc.domain.center.x(), sc.domain.center.y()}}};
  const char* phi_kind = sc.phi.kind == PhiKind::constant  ? "constant"
                         : sc.phi.kind == PhiKind::fourier ? "fourier"
                                                           : "table";
  j["phi"] = {{"kind", phi_kind},
              {"value", sc.phi.value},
              {"cos", sc.phi.cos_coefs},
              {"sin", sc.phi.sin_coefs},
              {"values", sc.phi.table}};
  j["u0"] = u0_to_json(sc.u0);
  j["reference_u0"] = sc.reference_u0 ? u0_to_json(*sc.reference_u0) : json(nullptr);
  j["grid"] = {{"n_radial", sc.n_radial}, {"n_angular", sc.n_angular}};
  j["stepper"] = {{"scheme", sc.stepper.scheme == Scheme::semi_implicit ? "semi_implicit" : "explicit"},
                  {"dt", sc.stepper.dt},
                  {"cfl", sc.stepper.cfl},
                  {"dt_growth", sc.stepper.dt_growth},
                  {"dt_max", sc.stepper.dt_max},
                  {"tol_speed", sc.stepper.tol_speed},
                  {"max_time", sc.stepper.max_time},
                  {"end_time", sc.stepper.end_time},
                  {"delta_space", sc.stepper.delta_space},
                  {"max_steps", sc.stepper.max_steps},
                  {"dense_sample_times", sc.stepper.dense_sample_times}};
  j["continuation"] = {{"eps0", sc.continuation.eps0},
                       {"ratio", sc.continuation.ratio},
                       {"eps_min", sc.continuation.eps_min},
                       {"newton",
                        {{"max_iterations", sc.continuation.newton.max_iterations},
                         {"tolerance", sc.continuation.newton.tolerance},
                         {"min_damping", sc.continuation.newton.min_damping}}}};
  j["seed_label"] = sc.seed_label;
  return j;
}

/// FNV-1a 64-bit digest of the canonical JSON text, as 16 hex digits.
inline std::string hash_text(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string scenario_hash(const Scenario& sc) { return hash_text(to_json(sc).dump()); }

/// Hash of the scenario with resolution and time-step settings removed: runs of the
/// same problem at different resolutions share it.
inline std::string family_hash(const Scenario& sc) {
  json j = to_json(sc);
  j.erase("grid");
  j["stepper"].erase("dt");
  j["phi"].erase("values");
  if (sc.u0.kind == U0Kind::table) j["u0"].erase("values");
  return hash_text(j.dump());
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ScenarioError("malformed JSON in " + path + ": " + e.what());
  }
  return parse_scenario(j);
}

inline GridFunction evaluate_u0(const U0Spec& u, const GridPtr& grid) {
  switch (u.kind) {
    case U0Kind::constant: return GridFunction(grid, u.value);
    case U0Kind::polynomial:
      return GridFunction::sample(grid, [&](const Vec2& x) {
        double sum = 0.0;
        for (const auto& m : u.terms) sum += m.coef * std::pow(x.x(), m.px) * std::pow(x.y(), m.py);
        return sum;
      });
    case U0Kind::table: {
      if (u.table.size() != grid->size()) throw ScenarioError("u0 table length does not match the grid");
      return GridFunction(grid, Eigen::Map<const Eigen::VectorXd>(u.table.data(), static_cast<Eigen::Index>(u.table.size())));
    }
  }
  throw ScenarioError("unknown u0 kind");
}

/// A scenario with its grid, operator and initial data built and validated.
struct ScenarioInstance {
  Scenario scenario;
  std::string hash;
  GridPtr grid;
  std::shared_ptr<const MeanCurvatureOperator> op;
  GridFunction u0;
  std::optional<GridFunction> reference_u0;
  double contact_mismatch = 0.0;  ///< of u0, one-sided
  bool compatible = false;        ///< u0 satisfies the contact condition to discretization accuracy
};

/// Data within 10 h^2 of the contact condition count as compatible.
inline constexpr double kCompatibilityFactor = 10.0;

inline ScenarioInstance instantiate(const Scenario& sc) {
  ScenarioInstance inst;
  inst.scenario = sc;
  inst.hash = scenario_hash(sc);
  const ConvexDomain domain = build_domain(sc.domain, sc.metric);
  inst.grid = build_grid(domain, sc.n_radial, sc.n_angular);
  for (const auto& node : inst.grid->nodes()) {
    if (node.metric.gauss_curvature < -1e-12) {
      throw ScenarioError("Gauss curvature is negative on the domain (K = " +
                          std::to_string(node.metric.gauss_curvature) + ")");
    }
  }
  inst.op = std::make_shared<const MeanCurvatureOperator>(inst.grid, sc.phi);
  inst.u0 = evaluate_u0(sc.u0, inst.grid);
  if (sc.reference_u0) inst.reference_u0 = evaluate_u0(*sc.reference_u0, inst.grid);
  for (const GridFunction* u : {&inst.u0, inst.reference_u0 ? &*inst.reference_u0 : nullptr}) {
    if (!u) continue;
    double w = 0.0;
    try {
      w = inst.op->du2(u->values).maxCoeff();
    } catch (const SpacelikeViolation& e) {
      throw ScenarioError(std::string("initial data is not space-like: ") + e.what());
    }
    if (!(w < 1.0)) throw ScenarioError("initial data is not space-like: sup|Du0|^2 = " + std::to_string(w));
  }
  inst.contact_mismatch = contact_mismatch(*inst.op, inst.u0.values);
  const double h = inst.grid->h();
  inst.compatible = inst.contact_mismatch <= kCompatibilityFactor * h * h;
  return inst;
}

}  // namespace lmcf::io
