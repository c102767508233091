#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gridvest/catalog.hpp"
#include "gridvest/csv.hpp"
#include "gridvest/error.hpp"
#include "gridvest/milp.hpp"
#include "gridvest/pv_model.hpp"
#include "gridvest/scenario.hpp"
#include "gridvest/time_grid.hpp"

namespace gridvest {

/// One single-type battery planning instance.
///
/// `pv_scale` and `ev_scale` multiply the PV profile and the EV demand series
/// uniformly; they are 1 for the nominal problem.
struct PlanningProblem {
  std::shared_ptr<const ScenarioData> scenario;
  std::vector<double> pv_profile;  // kW per slot
  BatteryCatalog catalog;
  EconomicParams econ;
  int battery_type = 4;
  double big_m = 0.0;
  double capacity_year_cap = 0.0;  // kWh installable per year
  bool allow_curtailment = false;
  bool force_no_battery = false;
  double pv_scale = 1.0;
  double ev_scale = 1.0;

  const TimeGrid& grid() const { return scenario->grid; }
  double pv(std::size_t s) const { return pv_scale * pv_profile[s]; }
  double ev(std::size_t s) const { return ev_scale * scenario->ev_demand[s]; }

  void validate() const {
    if (!scenario) throw InputError("planning problem has no scenario");
    const auto n = grid().slot_count();
    if (scenario->size() != n || pv_profile.size() != n)
      throw InputError("scenario / PV profile length does not match the time grid");
    if (catalog.horizon() < grid().years())
      throw InputError("catalog gap at year " + std::to_string(catalog.horizon() + 1));
    battery_type_slot(battery_type);
    econ.validate();
    if (!(capacity_year_cap > 0.0)) throw InputError("capacity_year_cap must be positive");
    if (big_m < capacity_year_cap * grid().years() / battery_type * (1.0 - 1e-12))
      throw InputError("big_m must dominate capacity_year_cap * years / type");
    if (!(pv_scale >= 0.0) || !(ev_scale >= 0.0)) throw InputError("PV / EV scale factors must be non-negative");
  }
};

/// Peak of residential load plus EV demand over the horizon (kW).
inline double peak_demand(const ScenarioData& s) {
  double peak = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) peak = std::max(peak, s.residential_load[i] + s.ev_demand[i]);
  return peak;
}

/// Builds a problem with the default sizing constants: a yearly installation
/// cap of 10 x peak demand x duration and the tightest valid big-M.
inline PlanningProblem make_problem(std::shared_ptr<const ScenarioData> scenario, std::vector<double> pv_profile,
                                    BatteryCatalog catalog, EconomicParams econ, int battery_type,
                                    bool allow_curtailment = false,
                                    std::optional<double> capacity_year_cap = std::nullopt) {
  PlanningProblem p;
  p.scenario = std::move(scenario);
  p.pv_profile = std::move(pv_profile);
  p.catalog = std::move(catalog);
  p.econ = econ;
  p.battery_type = battery_type;
  p.allow_curtailment = allow_curtailment;
  p.capacity_year_cap = capacity_year_cap.value_or(std::max(1.0, 10.0 * peak_demand(*p.scenario)) * battery_type);
  p.big_m = p.capacity_year_cap * p.scenario->grid.years() / battery_type;
  return p;
}

inline PlanningProblem with_battery_type(PlanningProblem p, int battery_type,
                                         std::optional<double> capacity_year_cap = {}) {
  p.battery_type = battery_type;
  p.capacity_year_cap = capacity_year_cap.value_or(std::max(1.0, 10.0 * peak_demand(*p.scenario)) * battery_type);
  p.big_m = p.capacity_year_cap * p.grid().years() / battery_type;
  return p;
}

/// Variable handles of an encoded planning model.
struct PlanModel {
  milp::Model model{"community_battery_plan"};
  std::vector<milp::VarId> cap, cap_max;  // per year
  std::vector<milp::VarId> soc, charge, discharge, utility, indicator, curtail;  // per slot
  int balance_rows = 0;
};

inline PlanModel build_model(const PlanningProblem& problem) {
  using milp::Relation;
  using milp::Term;
  problem.validate();
  const auto& grid = problem.grid();
  const auto& sc = *problem.scenario;
  const int years = grid.years();
  const auto slots = grid.slot_count();
  const double b = problem.battery_type;
  const double eta_ch = problem.catalog.charge_eff();
  const double eta_dis = problem.catalog.discharge_eff();
  const double cap_hi = problem.force_no_battery ? 0.0 : problem.capacity_year_cap;
  // Without a battery the storage variables are identically zero; leave them out.
  const bool battery = !problem.force_no_battery;

  PlanModel pm;
  auto& m = pm.model;
  for (int y = 1; y <= years; ++y) {
    const auto tag = "[" + std::to_string(y) + "]";
    pm.cap.push_back(m.add_continuous(0.0, cap_hi, "cap" + tag));
    pm.cap_max.push_back(m.add_continuous(0.0, milp::kInf, "cap_max" + tag));
    m.set_objective(pm.cap.back(), problem.econ.discount(y) * problem.catalog.cost(y, problem.battery_type));
  }
  // Installations are permanent: cap_max[y] = cap_max[y-1] + cap[y].
  for (int y = 0; y < years; ++y) {
    std::vector<Term> terms{{pm.cap_max[y], 1.0}, {pm.cap[y], -1.0}};
    if (y > 0) terms.push_back({pm.cap_max[y - 1], -1.0});
    m.add_constraint(std::move(terms), Relation::kEqual, 0.0, "cumulative[" + std::to_string(y + 1) + "]");
  }

  pm.soc.reserve(slots);
  for (std::size_t s = 0; s < slots; ++s) {
    const auto c = grid.coord(s);
    const auto tag = c.str();
    if (battery) {
      pm.soc.push_back(m.add_continuous(0.0, milp::kInf, "soc" + tag));
      pm.charge.push_back(m.add_continuous(0.0, milp::kInf, "p_ch" + tag));
      // Discharging excludes charging and export is forbidden, so discharge can
      // never exceed the net deficit of the slot.
      const double deficit = std::max(0.0, sc.residential_load[s] + problem.ev(s) - problem.pv(s));
      pm.discharge.push_back(m.add_continuous(0.0, deficit, "p_dis" + tag));
      pm.indicator.push_back(m.add_binary("b_ch" + tag));
    }
    pm.utility.push_back(m.add_continuous(0.0, milp::kInf, "p_utility" + tag));
    if (problem.allow_curtailment) pm.curtail.push_back(m.add_continuous(0.0, problem.pv(s), "curtail" + tag));
    const double weight = grid.day_weight(c.quarter);
    m.set_objective(pm.utility.back(), problem.econ.discount(c.year) * weight * sc.utility_price[s]);
  }

  for (std::size_t s = 0; s < slots; ++s) {
    const auto c = grid.coord(s);
    const auto tag = c.str();
    const auto cm = pm.cap_max[c.year - 1];
    if (!battery) {
      std::vector<Term> balance{{pm.utility[s], 1.0}};
      if (problem.allow_curtailment) balance.push_back({pm.curtail[s], -1.0});
      m.add_constraint(std::move(balance), Relation::kEqual, sc.residential_load[s] + problem.ev(s) - problem.pv(s),
                       "balance" + tag);
      ++pm.balance_rows;
      continue;
    }
    // Cyclic day: hour 1 follows hour 24 of the same day.
    const std::size_t prev = (c.hour == 1) ? s + kHoursPerDay - 1 : s - 1;
    m.add_constraint(
        {{pm.soc[s], 1.0}, {pm.soc[prev], -1.0}, {pm.charge[s], -eta_ch}, {pm.discharge[s], 1.0 / eta_dis}},
        Relation::kEqual, 0.0, "soc_balance" + tag);
    m.add_constraint({{pm.soc[s], 1.0}, {cm, -1.0}}, Relation::kLessEqual, 0.0, "soc_cap" + tag);
    m.add_constraint({{pm.charge[s], 1.0}, {pm.indicator[s], -problem.big_m}}, Relation::kLessEqual, 0.0,
                     "charge_excl" + tag);
    m.add_constraint({{pm.discharge[s], 1.0}, {pm.indicator[s], problem.big_m}}, Relation::kLessEqual, problem.big_m,
                     "discharge_excl" + tag);
    m.add_constraint({{pm.charge[s], 1.0}, {cm, -1.0 / b}}, Relation::kLessEqual, 0.0, "charge_rate" + tag);
    m.add_constraint({{pm.discharge[s], 1.0}, {cm, -1.0 / b}}, Relation::kLessEqual, 0.0, "discharge_rate" + tag);
    std::vector<Term> balance{{pm.utility[s], 1.0}, {pm.charge[s], -1.0}, {pm.discharge[s], 1.0}};
    if (problem.allow_curtailment) balance.push_back({pm.curtail[s], -1.0});
    m.add_constraint(std::move(balance), Relation::kEqual, sc.residential_load[s] + problem.ev(s) - problem.pv(s),
                     "balance" + tag);
    ++pm.balance_rows;
  }
  return pm;
}

/// Hourly dispatch of a solved plan.
struct Dispatch {
  std::vector<double> pv, utility, charge, discharge, soc, indicator, curtail;
};

struct PlanSolution {
  int battery_type = 0;
  milp::SolveStatus status = milp::SolveStatus::kNumericalFailure;
  std::string diagnostics;
  std::vector<double> cap_per_year, cap_cumulative;
  Dispatch dispatch;
  std::vector<double> capex_per_year, opex_per_year;                  // discounted $
  std::vector<double> capex_per_year_nominal, opex_per_year_nominal;  // undiscounted $
  double capex = 0.0, opex = 0.0, objective = 0.0;
  double solver_objective = 0.0, mip_gap = 0.0;
  long nodes = 0, iterations = 0;
  std::size_t clamped_pv_slots = 0;

  bool ok() const { return status == milp::SolveStatus::kOptimal || status == milp::SolveStatus::kGapLimit; }
  double total_capacity() const { return cap_cumulative.empty() ? 0.0 : cap_cumulative.back(); }
};

/// First slot whose PV output exceeds load plus EV demand, if any.
inline std::optional<std::size_t> first_surplus_slot(const PlanningProblem& p) {
  const auto& sc = *p.scenario;
  for (std::size_t s = 0; s < sc.size(); ++s)
    if (p.pv(s) > sc.residential_load[s] + p.ev(s) + 1e-9) return s;
  return std::nullopt;
}

/// Recomputes discounted and nominal Capex / Opex per year from plan values.
inline void audit_costs(const PlanningProblem& p, PlanSolution& sol) {
  const auto& grid = p.grid();
  const int years = grid.years();
  sol.capex_per_year.assign(years, 0.0);
  sol.opex_per_year.assign(years, 0.0);
  sol.capex_per_year_nominal.assign(years, 0.0);
  sol.opex_per_year_nominal.assign(years, 0.0);
  for (int y = 1; y <= years; ++y) {
    const double nominal = sol.cap_per_year[y - 1] * p.catalog.cost(y, p.battery_type);
    sol.capex_per_year_nominal[y - 1] = nominal;
    sol.capex_per_year[y - 1] = p.econ.discount(y) * nominal;
  }
  for (std::size_t s = 0; s < grid.slot_count(); ++s) {
    const auto c = grid.coord(s);
    const double nominal = grid.day_weight(c.quarter) * sol.dispatch.utility[s] * p.scenario->utility_price[s];
    sol.opex_per_year_nominal[c.year - 1] += nominal;
    sol.opex_per_year[c.year - 1] += p.econ.discount(c.year) * nominal;
  }
  sol.capex = sol.opex = 0.0;
  for (int y = 0; y < years; ++y) {
    sol.capex += sol.capex_per_year[y];
    sol.opex += sol.opex_per_year[y];
  }
  sol.objective = sol.capex + sol.opex;
}

inline PlanSolution extract_plan(const PlanningProblem& p, const PlanModel& pm, const milp::Solution& ms) {
  PlanSolution out;
  out.battery_type = p.battery_type;
  out.status = ms.status;
  out.diagnostics = ms.diagnostics;
  out.nodes = ms.nodes;
  out.iterations = ms.iterations;
  out.mip_gap = ms.mip_gap;
  if (!ms.has_incumbent) return out;
  const int years = p.grid().years();
  const auto slots = p.grid().slot_count();
  double running = 0.0;
  for (int y = 0; y < years; ++y) {
    out.cap_per_year.push_back(ms.value(pm.cap[y]));
    running += out.cap_per_year.back();
    out.cap_cumulative.push_back(running);
  }
  auto& d = out.dispatch;
  for (std::size_t s = 0; s < slots; ++s) {
    d.pv.push_back(p.pv(s));
    d.utility.push_back(ms.value(pm.utility[s]));
    const bool battery = !pm.soc.empty();
    d.charge.push_back(battery ? ms.value(pm.charge[s]) : 0.0);
    d.discharge.push_back(battery ? ms.value(pm.discharge[s]) : 0.0);
    d.soc.push_back(battery ? ms.value(pm.soc[s]) : 0.0);
    d.indicator.push_back(battery ? ms.value(pm.indicator[s]) : 0.0);
    d.curtail.push_back(p.allow_curtailment ? ms.value(pm.curtail[s]) : 0.0);
  }
  out.solver_objective = ms.objective;
  audit_costs(p, out);
  return out;
}

inline PlanSolution solve_plan(const PlanningProblem& problem, const milp::SolverOptions& options = {}) {
  const auto pm = build_model(problem);
  const auto ms = milp::solve_milp(pm.model, options);
  auto out = extract_plan(problem, pm, ms);
  if (ms.status == milp::SolveStatus::kInfeasible && !problem.allow_curtailment) {
    if (auto s = first_surplus_slot(problem))
      out.diagnostics = "infeasible: PV surplus cannot be absorbed without export; first surplus slot " +
                        problem.grid().coord(*s).str() + " (enable curtailment or raise capacity_year_cap)";
  }
  return out;
}

/// Cost of serving the area with no battery. Surplus PV is spilled, which is
/// the only way to honour the no-export rule without storage.
inline PlanSolution solve_baseline(PlanningProblem problem, const milp::SolverOptions& options = {}) {
  problem.force_no_battery = true;
  problem.allow_curtailment = true;
  return solve_plan(problem, options);
}

/// Checks every plan invariant against the problem data; returns one line per
/// violation (empty when the plan is consistent).
inline std::vector<std::string> verify_plan(const PlanningProblem& p, const PlanSolution& sol, double feas_tol = 1e-7,
                                            double int_tol = 1e-6) {
  std::vector<std::string> issues;
  auto report = [&](const std::string& what, std::size_t s) {
    if (issues.size() < 50) issues.push_back(what + " at " + p.grid().coord(s).str());
  };
  const auto& grid = p.grid();
  const auto& sc = *p.scenario;
  const auto& d = sol.dispatch;
  const double b = p.battery_type;
  const double eta_ch = p.catalog.charge_eff(), eta_dis = p.catalog.discharge_eff();
  if (d.utility.size() != grid.slot_count() || sol.cap_per_year.size() != static_cast<std::size_t>(grid.years())) {
    issues.push_back("plan shape does not match the time grid");
    return issues;
  }
  double running = 0.0;
  for (int y = 0; y < grid.years(); ++y) {
    running += sol.cap_per_year[y];
    if (std::abs(running - sol.cap_cumulative[y]) > feas_tol * std::max(1.0, running))
      issues.push_back("cumulative capacity is not the running sum at year " + std::to_string(y + 1));
    if (sol.cap_per_year[y] < -feas_tol) issues.push_back("negative installation at year " + std::to_string(y + 1));
  }
  const double cap_tol = feas_tol * std::max(1.0, running);
  for (std::size_t s = 0; s < grid.slot_count(); ++s) {
    const double cm = sol.cap_cumulative[grid.year_of(s) - 1];
    if (d.soc[s] < -feas_tol || d.soc[s] > cm + cap_tol) report("SoC outside [0, capacity]", s);
    if (d.charge[s] < -feas_tol || d.charge[s] > cm / b + cap_tol) report("charge outside rate limit", s);
    if (d.discharge[s] < -feas_tol || d.discharge[s] > cm / b + cap_tol) report("discharge outside rate limit", s);
    if (d.utility[s] < -feas_tol) report("export to the grid", s);
    if (std::abs(d.pv[s] - p.pv(s)) > feas_tol * std::max(1.0, p.pv(s))) report("PV output differs from the model", s);
    const double thresh = int_tol * p.big_m;
    if (d.charge[s] > thresh && d.discharge[s] > thresh) report("simultaneous charge and discharge", s);
    const double residual = d.pv[s] - d.curtail[s] + d.utility[s] - d.charge[s] + d.discharge[s] -
                            sc.residential_load[s] - p.ev(s);
    if (std::abs(residual) > feas_tol) report("power balance residual " + csv::format_double(residual), s);
    if (!p.allow_curtailment && d.curtail[s] != 0.0) report("curtailment while disabled", s);
  }
  for (std::size_t day = 0; day < grid.day_count(); ++day) {
    const auto first = grid.day_start(day);
    double net = 0.0;
    for (int t = 0; t < kHoursPerDay; ++t) {
      const auto s = first + t;
      net += eta_ch * d.charge[s] - d.discharge[s] / eta_dis;
      const auto prev = t == 0 ? first + kHoursPerDay - 1 : s - 1;
      const double rec = d.soc[s] - d.soc[prev] - eta_ch * d.charge[s] + d.discharge[s] / eta_dis;
      if (std::abs(rec) > feas_tol * std::max(1.0, sol.cap_cumulative[grid.year_of(s) - 1]))
        report("SoC recursion residual", s);
    }
    if (std::abs(net) > kHoursPerDay * feas_tol) report("daily energy imbalance " + csv::format_double(net), first);
  }
  const double rel = std::abs(sol.objective - sol.solver_objective) / std::max(1.0, std::abs(sol.objective));
  if (rel > 1e-6) issues.push_back("objective audit mismatch: recomputed " + csv::format_double(sol.objective) +
                                   " vs solver " + csv::format_double(sol.solver_objective));
  return issues;
}

/// Worker count for parallel solves: GRIDVEST_THREADS if set, else the hardware concurrency.
inline unsigned worker_count() {
  if (const char* env = std::getenv("GRIDVEST_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs `job(i)` for i in [0, count) on up to worker_count() threads.
template <typename Job>
void parallel_for(std::size_t count, Job&& job) {
  const unsigned workers = std::min<unsigned>(worker_count(), static_cast<unsigned>(std::max<std::size_t>(count, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) job(i);
    });
  for (auto& t : pool) t.join();
}

struct TypeResult {
  int battery_type = 0;
  PlanSolution plan;
  std::string error;  // non-empty when this type could not be solved
  bool winner = false;
  bool ok() const { return error.empty() && plan.ok(); }
};

/// Solves the plan independently for every requested battery type and ranks
/// the results by objective (failures last, in input order).
inline std::vector<TypeResult> compare_types(const PlanningProblem& base, const std::vector<int>& types,
                                             const milp::SolverOptions& options = {},
                                             std::optional<double> capacity_year_cap = {}) {
  std::vector<TypeResult> results(types.size());
  parallel_for(types.size(), [&](std::size_t i) {
    auto& r = results[i];
    r.battery_type = types[i];
    try {
      r.plan = solve_plan(with_battery_type(base, types[i], capacity_year_cap), options);
      if (!r.plan.ok()) r.error = std::string(milp::to_string(r.plan.status)) + ": " + r.plan.diagnostics;
    } catch (const std::exception& e) {
      r.error = e.what();
    }
  });
  std::stable_sort(results.begin(), results.end(), [](const TypeResult& a, const TypeResult& b) {
    if (a.ok() != b.ok()) return a.ok();
    if (!a.ok()) return false;
    return a.plan.objective < b.plan.objective;
  });
  if (!results.empty() && results.front().ok()) results.front().winner = true;
  return results;
}

}  // namespace gridvest
