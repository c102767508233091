#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "gridvest/catalog.hpp"
#include "gridvest/error.hpp"
#include "gridvest/igdt.hpp"
#include "gridvest/milp/model.hpp"
#include "gridvest/planner.hpp"
#include "gridvest/pv_model.hpp"
#include "gridvest/scenario.hpp"

namespace gridvest {

/// Everything a run needs. Relative paths are resolved against the config
/// file's directory when loaded from disk.
struct RunConfig {
  std::uint64_t seed = 1;
  int years = 15;
  DayMode day_mode = DayMode::kRepresentative;

  std::string scenario_path;  // empty: synthesize from the seed
  PriceUnit price_unit = PriceUnit::kPerKwh;
  std::string catalog_path;   // empty: built-in cost table
  int catalog_base_year = 2023;
  double cost_scale = 1.0;    // multiplies every monetary input (catalog and prices)

  PvParams pv;
  EconomicParams econ;

  std::vector<int> battery_types{1, 2, 4, 8};
  double charge_efficiency = 0.95;
  double discharge_efficiency = 0.95;
  std::optional<double> capacity_year_cap;
  bool curtailment = false;
  bool literal_profit = false;

  milp::SolverOptions solver;

  igdt::DeviationGrid igdt_grid{{0.02, 0.05, 0.1, 0.2}, igdt::Mode::kBoth, igdt::Coupling::kIndependent};
  igdt::IgdtOptions igdt_options;
  std::optional<int> igdt_battery_type;  // empty: the cheapest type from a deterministic run

  std::string output_dir = "out";

  void validate() const {
    if (years < 1) throw InputError("grid.years must be >= 1");
    for (int b : battery_types) battery_type_slot(b);
    if (std::set<int>(battery_types.begin(), battery_types.end()).size() != battery_types.size())
      throw InputError("battery.types contains duplicates");
    if (!(cost_scale > 0.0)) throw InputError("economics.cost_scale must be positive");
    if (capacity_year_cap && !(*capacity_year_cap > 0.0))
      throw InputError("battery.capacity_year_cap must be positive");
    if (igdt_battery_type) battery_type_slot(*igdt_battery_type);
    if (!(igdt_options.alpha_tol > 0.0 && igdt_options.alpha_tol < 0.5))
      throw InputError("igdt.alpha_tol must lie in (0, 0.5)");
    if (igdt_options.max_iterations < 1) throw InputError("igdt.max_iterations must be >= 1");
    if (!(solver.feas_tol > 0.0) || !(solver.int_tol > 0.0) || !(solver.rel_gap >= 0.0))
      throw InputError("solver tolerances must be positive");
    pv.validate();
    econ.validate();
    igdt_grid.validate();
    if (!scenario_path.empty() && !std::filesystem::exists(scenario_path))
      throw InputError("scenario file not found: " + scenario_path);
    if (!catalog_path.empty() && !std::filesystem::exists(catalog_path))
      throw InputError("catalog file not found: " + catalog_path);
  }
};

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> known) {
  if (!obj.is_object()) throw InputError("config: '" + where + "' must be an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw InputError("config: unknown key '" + (where.empty() ? key : where + "." + key) + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key) || obj.at(key).is_null()) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw InputError("config: '" + where + "." + key + "' has the wrong type");
  }
}

inline std::string resolve(const std::string& path, const std::filesystem::path& base) {
  if (path.empty()) return path;
  std::filesystem::path p(path);
  return p.is_absolute() ? p.string() : (base / p).lexically_normal().string();
}

}  // namespace detail

/// Parses a JSON config document. Unknown keys are rejected.
inline RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  using detail::read;
  RunConfig c;
  detail::reject_unknown(j, "", {"seed", "grid", "scenario", "catalog", "pv", "economics", "battery", "solver", "igdt",
                                 "output"});
  read(j, "seed", c.seed, "");
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    detail::reject_unknown(g, "grid", {"years", "day_mode"});
    read(g, "years", c.years, "grid");
    std::string mode;
    read(g, "day_mode", mode, "grid");
    if (mode == "full") c.day_mode = DayMode::kFull;
    else if (mode.empty() || mode == "representative") c.day_mode = DayMode::kRepresentative;
    else throw InputError("config: grid.day_mode must be 'representative' or 'full'");
  }
  if (j.contains("scenario")) {
    const auto& s = j["scenario"];
    detail::reject_unknown(s, "scenario", {"path", "price_unit"});
    read(s, "path", c.scenario_path, "scenario");
    std::string unit;
    read(s, "price_unit", unit, "scenario");
    if (unit == "$/MWh" || unit == "per_mwh") c.price_unit = PriceUnit::kPerMwh;
    else if (unit.empty() || unit == "$/kWh" || unit == "per_kwh") c.price_unit = PriceUnit::kPerKwh;
    else throw InputError("config: scenario.price_unit must be '$/kWh' or '$/MWh'");
  }
  if (j.contains("catalog")) {
    const auto& s = j["catalog"];
    detail::reject_unknown(s, "catalog", {"path", "base_year"});
    read(s, "path", c.catalog_path, "catalog");
    read(s, "base_year", c.catalog_base_year, "catalog");
  }
  if (j.contains("pv")) {
    const auto& s = j["pv"];
    detail::reject_unknown(s, "pv", {"rating_kw", "efficiency", "gamma", "noct", "i_stc", "t_stc"});
    read(s, "rating_kw", c.pv.rating, "pv");
    read(s, "efficiency", c.pv.efficiency, "pv");
    read(s, "gamma", c.pv.derating, "pv");
    read(s, "noct", c.pv.noct, "pv");
    read(s, "i_stc", c.pv.i_stc, "pv");
    read(s, "t_stc", c.pv.t_stc, "pv");
  }
  if (j.contains("economics")) {
    const auto& s = j["economics"];
    detail::reject_unknown(s, "economics", {"inflation_rate", "cost_scale"});
    read(s, "inflation_rate", c.econ.inflation_rate, "economics");
    read(s, "cost_scale", c.cost_scale, "economics");
  }
  if (j.contains("battery")) {
    const auto& s = j["battery"];
    detail::reject_unknown(s, "battery", {"types", "charge_efficiency", "discharge_efficiency", "capacity_year_cap",
                                          "curtailment", "literal_profit"});
    read(s, "types", c.battery_types, "battery");
    read(s, "charge_efficiency", c.charge_efficiency, "battery");
    read(s, "discharge_efficiency", c.discharge_efficiency, "battery");
    if (s.contains("capacity_year_cap") && !s["capacity_year_cap"].is_null()) {
      double v = 0.0;
      read(s, "capacity_year_cap", v, "battery");
      c.capacity_year_cap = v;
    }
    read(s, "curtailment", c.curtailment, "battery");
    read(s, "literal_profit", c.literal_profit, "battery");
  }
  if (j.contains("solver")) {
    const auto& s = j["solver"];
    detail::reject_unknown(s, "solver", {"feas_tol", "int_tol", "rel_gap", "node_limit", "time_limit_s"});
    read(s, "feas_tol", c.solver.feas_tol, "solver");
    read(s, "int_tol", c.solver.int_tol, "solver");
    read(s, "rel_gap", c.solver.rel_gap, "solver");
    read(s, "node_limit", c.solver.node_limit, "solver");
    read(s, "time_limit_s", c.solver.time_limit_s, "solver");
  }
  if (j.contains("igdt")) {
    const auto& s = j["igdt"];
    detail::reject_unknown(s, "igdt", {"betas", "mode", "coupling", "alpha_tol", "max_iterations", "battery_type"});
    read(s, "betas", c.igdt_grid.betas, "igdt");
    std::string text;
    read(s, "mode", text, "igdt");
    if (!text.empty()) c.igdt_grid.mode = igdt::parse_mode(text);
    text.clear();
    read(s, "coupling", text, "igdt");
    if (!text.empty()) c.igdt_grid.coupling = igdt::parse_coupling(text);
    read(s, "alpha_tol", c.igdt_options.alpha_tol, "igdt");
    read(s, "max_iterations", c.igdt_options.max_iterations, "igdt");
    if (s.contains("battery_type") && !s["battery_type"].is_null()) {
      int b = 0;
      read(s, "battery_type", b, "igdt");
      c.igdt_battery_type = b;
    }
  }
  if (j.contains("output")) {
    const auto& s = j["output"];
    detail::reject_unknown(s, "output", {"dir"});
    read(s, "dir", c.output_dir, "output");
  }
  c.scenario_path = detail::resolve(c.scenario_path, base_dir);
  c.catalog_path = detail::resolve(c.catalog_path, base_dir);
  c.output_dir = detail::resolve(c.output_dir, base_dir);
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("config " + path + ": " + e.what());
  }
  return parse_config(j, std::filesystem::path(path).parent_path());
}

/// Loaded inputs and the nominal planning problem (type set per solve).
struct RunContext {
  RunConfig config;
  std::shared_ptr<const ScenarioData> scenario;
  PvProfile pv;
  BatteryCatalog catalog;
  PlanningProblem problem;
};

inline RunContext load_context(const RunConfig& cfg) {
  cfg.validate();
  RunContext ctx;
  ctx.config = cfg;
  const TimeGrid grid(cfg.years, cfg.day_mode);
  ScenarioData data = cfg.scenario_path.empty() ? synth_scenario(cfg.seed, grid)
                                                : load_scenario(cfg.scenario_path, grid, {cfg.price_unit});
  data.validate();
  for (auto& p : data.utility_price) p *= cfg.cost_scale;
  ctx.scenario = std::make_shared<const ScenarioData>(std::move(data));
  ctx.pv = build_pv_profile(*ctx.scenario, cfg.pv);
  ctx.catalog = cfg.catalog_path.empty() ? gencost_catalog(std::min(15, std::max(cfg.years, 1)))
                                         : load_catalog(cfg.catalog_path, cfg.years, cfg.catalog_base_year);
  if (ctx.catalog.horizon() < cfg.years)
    throw InputError("catalog gap at year " + std::to_string(ctx.catalog.horizon() + 1) + " (" +
                     std::to_string(ctx.catalog.base_year() + ctx.catalog.horizon()) + ")");
  ctx.catalog = ctx.catalog.scaled(cfg.cost_scale);
  ctx.catalog.set_efficiencies(cfg.charge_efficiency, cfg.discharge_efficiency);
  const int first_type = cfg.battery_types.empty() ? 4 : cfg.battery_types.front();
  ctx.problem = make_problem(ctx.scenario, ctx.pv.power, ctx.catalog, cfg.econ, first_type, cfg.curtailment,
                             cfg.capacity_year_cap);
  return ctx;
}

}  // namespace gridvest
