#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gridvest/cashflow.hpp"
#include "gridvest/config.hpp"
#include "gridvest/error.hpp"
#include "gridvest/igdt.hpp"
#include "gridvest/planner.hpp"
#include "gridvest/report.hpp"

namespace gridvest::cli {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitSolve = 1;
inline constexpr int kExitInput = 2;

/// Runs a command body and maps exceptions onto the exit-code contract.
inline int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const SolveError& e) {
    err << "solve error: " << e.what() << '\n';
    return kExitSolve;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitSolve;
  }
}

inline void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

inline void print_stats(std::ostream& os, const char* name, const std::vector<double>& v, const char* unit) {
  const auto st = stats_of(v);
  os << "  " << std::left << std::setw(14) << name << " min " << csv::format_fixed(st.min, 4) << "  mean "
     << csv::format_fixed(st.mean, 4) << "  max " << csv::format_fixed(st.max, 4) << ' ' << unit << '\n';
}

/// Loads every input and prints a summary; solves nothing.
inline int cmd_validate(const RunConfig& cfg, std::ostream& os, std::ostream& err) {
  return guarded(err, [&] {
    const auto ctx = load_context(cfg);
    const auto& g = ctx.scenario->grid;
    os << "grid: " << g.years() << " years, " << (g.representative_days() ? "representative-day" : "full-year")
       << " mode, " << g.slot_count() << " slots (" << g.day_count() << " day blocks)\n";
    os << "day weights: " << g.day_weight(1) << ' ' << g.day_weight(2) << ' ' << g.day_weight(3) << ' '
       << g.day_weight(4) << '\n';
    os << "scenario: " << (cfg.scenario_path.empty() ? "synthetic (seed " + std::to_string(cfg.seed) + ")"
                                                      : cfg.scenario_path)
       << '\n';
    print_stats(os, "irradiance", ctx.scenario->irradiance, "W/m2");
    print_stats(os, "ambient_temp", ctx.scenario->ambient_temp, "C");
    print_stats(os, "load", ctx.scenario->residential_load, "kW");
    print_stats(os, "ev_demand", ctx.scenario->ev_demand, "kW");
    print_stats(os, "price", ctx.scenario->utility_price, "$/kWh");
    print_stats(os, "pv_output", ctx.pv.power, "kW");
    if (ctx.pv.clamped_slots > 0) os << "  pv output clamped to 0 in " << ctx.pv.clamped_slots << " slots\n";
    os << "catalog: " << (cfg.catalog_path.empty() ? std::string("built-in") : cfg.catalog_path) << ", years "
       << ctx.catalog.base_year() << ".." << ctx.catalog.base_year() + cfg.years - 1 << " covered ("
       << ctx.catalog.horizon() << " rows used)\n";
    os << "battery types:";
    for (int b : cfg.battery_types) os << ' ' << b << 'h';
    os << "\ncurtailment: " << (cfg.curtailment ? "on" : "off") << '\n';
    if (auto s = first_surplus_slot(ctx.problem))
      os << "first PV surplus slot: " << ctx.scenario->grid.coord(*s).str()
         << (cfg.curtailment ? "" : " (must be absorbed by the battery)") << '\n';
    os << "ok\n";
    return kExitOk;
  });
}

/// Deterministic planning: baseline plus every configured type, then reports.
inline int cmd_plan(const RunConfig& cfg, std::ostream& os, std::ostream& err) {
  return guarded(err, [&] {
    const auto ctx = load_context(cfg);
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    const auto stamp = report::stamp_line(cfg.seed);
    const int years = cfg.years;

    const auto baseline = solve_baseline(ctx.problem, cfg.solver);
    if (!baseline.ok()) {
      err << "no-battery baseline failed: " << milp::to_string(baseline.status) << ' ' << baseline.diagnostics << '\n';
      return kExitSolve;
    }
    auto results = compare_types(ctx.problem, cfg.battery_types, cfg.solver, cfg.capacity_year_cap);
    int solved = 0;
    for (auto& r : results) {
      if (!r.ok()) {
        err << "type " << r.battery_type << "h failed: " << r.error << '\n';
        continue;
      }
      const auto problem = with_battery_type(ctx.problem, r.battery_type, cfg.capacity_year_cap);
      const auto issues = verify_plan(problem, r.plan, cfg.solver.feas_tol, cfg.solver.int_tol);
      if (!issues.empty()) {
        r.error = "plan failed verification: " + issues.front();
        err << "type " << r.battery_type << "h: " << r.error << '\n';
        continue;
      }
      ++solved;
      report::write_dispatch(dir / ("dispatch_type" + std::to_string(r.battery_type) + ".csv"), stamp, problem,
                             r.plan);
    }
    report::write_dispatch(dir / "dispatch_no_battery.csv", stamp, ctx.problem, baseline);

    const auto rows = cashflow::summary_report(baseline, results);
    std::vector<cashflow::CashflowReport> discounted, nominal;
    json cash = json::array();
    for (const auto& r : results) {
      if (!r.ok()) continue;
      discounted.push_back(cashflow::build_report(baseline, r.plan, false, cfg.literal_profit));
      nominal.push_back(cashflow::build_report(baseline, r.plan, true, cfg.literal_profit));
    }
    auto by_type = [](const auto& a, const auto& b) { return a.battery_type < b.battery_type; };
    std::sort(discounted.begin(), discounted.end(), by_type);
    std::sort(nominal.begin(), nominal.end(), by_type);
    for (const auto& c : discounted) {
      report::write_cashflow_chart(dir / ("cashflow_type" + std::to_string(c.battery_type) + ".csv"), stamp, c);
      cash.push_back(report::cashflow_json(c));
    }
    report::write_cashflow_details(dir / "cashflow_details.csv", stamp, discounted, nominal);
    report::write_year_tables(dir, stamp, baseline, results, years);
    report::write_summary_table(dir / "table5_total_cost.csv", stamp, rows);

    json summary;
    summary["seed"] = cfg.seed;
    summary["years"] = years;
    summary["day_mode"] = cfg.day_mode == DayMode::kFull ? "full" : "representative";
    summary["curtailment"] = cfg.curtailment;
    summary["baseline"] = report::plan_json(baseline);
    json plans = json::array();
    auto sorted = results;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const TypeResult& a, const TypeResult& b) { return a.battery_type < b.battery_type; });
    for (const auto& r : sorted) {
      auto j = r.ok() ? report::plan_json(r.plan)
                      : json{{"status", milp::to_string(r.plan.status)}, {"error", r.error}};
      j["battery_type"] = r.battery_type;
      plans.push_back(j);
    }
    summary["plans"] = plans;
    summary["summary"] = report::summary_json(rows);
    summary["cashflow"] = cash;
    write_json(dir / "plan_summary.json", summary);

    os << std::left << std::setw(16) << "method" << std::right << std::setw(16) << "total_cost" << std::setw(16)
       << "profit" << "  breakeven\n";
    for (const auto& r : rows) {
      os << std::left << std::setw(16) << r.method << std::right << std::setw(16)
         << (r.error.empty() ? csv::format_fixed(r.total_cost, 0) : std::string("failed")) << std::setw(16)
         << (r.profit ? csv::format_fixed(*r.profit, 0) : std::string("-")) << "  "
         << (r.breakeven_year ? "year " + std::to_string(*r.breakeven_year) : std::string("-"))
         << (r.winner ? "  <- winner" : "") << '\n';
    }
    os << "reports written to " << dir.string() << '\n';
    if (!cfg.battery_types.empty() && solved == 0) return kExitSolve;
    return kExitOk;
  });
}

/// IGDT workflow: deterministic anchor, then the radius sweep.
inline int cmd_igdt(const RunConfig& cfg, std::ostream& os, std::ostream& err) {
  return guarded(err, [&] {
    const auto ctx = load_context(cfg);
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    const auto stamp = report::stamp_line(cfg.seed);
    if (!cfg.curtailment)
      err << "warning: curtailment is off; cost need not fall as PV grows, so PV radii may be unreliable\n";

    int type = 0;
    if (cfg.igdt_battery_type) {
      type = *cfg.igdt_battery_type;
    } else {
      if (cfg.battery_types.empty()) throw InputError("igdt needs igdt.battery_type or a non-empty battery.types");
      const auto results = compare_types(ctx.problem, cfg.battery_types, cfg.solver, cfg.capacity_year_cap);
      if (!results.front().ok()) {
        err << "no battery type could be planned: " << results.front().error << '\n';
        return kExitSolve;
      }
      type = results.front().battery_type;
      os << "using the cheapest type: " << type << "h\n";
    }
    const auto problem = with_battery_type(ctx.problem, type, cfg.capacity_year_cap);
    const auto anchor = solve_plan(problem, cfg.solver);
    if (!anchor.ok()) {
      err << "deterministic anchor failed: " << milp::to_string(anchor.status) << ' ' << anchor.diagnostics << '\n';
      return kExitSolve;
    }
    os << "deterministic objective: " << csv::format_fixed(anchor.objective, 2) << '\n';

    auto opt = cfg.igdt_options;
    opt.solver = cfg.solver;
    const auto curve = igdt::sweep(problem, anchor.objective, cfg.igdt_grid, opt);
    report::write_igdt_csv(dir / "igdt_curve.csv", stamp, curve);
    auto j = report::igdt_json(curve, type);
    j["seed"] = cfg.seed;
    write_json(dir / "igdt_curve.json", j);

    std::ofstream log(dir / "igdt_log.txt");
    log << stamp << '\n';
    int failures = 0;
    for (const auto& r : curve.results) {
      std::ostringstream line;
      line << "beta=" << csv::format_double(r.beta) << ' ' << igdt::to_string(r.mode) << ' '
           << igdt::to_string(r.param) << " alpha=" << csv::format_fixed(r.alpha, 4)
           << " cost=" << csv::format_fixed(r.achieved_cost, 2) << " solves=" << r.iterations;
      if (!r.flags().empty()) line << " [" << r.flags() << ']';
      if (!r.error.empty()) {
        line << " error: " << r.error;
        ++failures;
      }
      log << line.str() << '\n';
      os << line.str() << '\n';
    }
    if (failures > 0) err << failures << " radius computations reported failures\n";
    os << "reports written to " << dir.string() << '\n';
    return kExitOk;
  });
}

/// Writes the synthetic scenario and the built-in catalog as CSV.
inline int cmd_synth(const RunConfig& cfg, std::ostream& os, std::ostream& err) {
  return guarded(err, [&] {
    cfg.validate();
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    const auto data = synth_scenario(cfg.seed, TimeGrid(cfg.years, cfg.day_mode));
    write_scenario(data, (dir / "scenario.csv").string(), "synthetic seed=" + std::to_string(cfg.seed));
    write_catalog((dir / "catalog.csv").string(), 15);
    os << "wrote " << (dir / "scenario.csv").string() << " (" << data.size() << " slots) and "
       << (dir / "catalog.csv").string() << '\n';
    return kExitOk;
  });
}

/// Re-verifies written results against the configured inputs: every plan in
/// `<out>/plan_summary.json` (invariants and cost audit), and when present the
/// IGDT curve (band check, re-solving at each radius).
inline int cmd_check(const RunConfig& cfg, std::ostream& os, std::ostream& err, bool plans = true,
                     bool igdt_curve = true) {
  return guarded(err, [&] {
    const auto ctx = load_context(cfg);
    const fs::path dir(cfg.output_dir);
    int failures = 0, checked = 0;
    if (plans && fs::exists(dir / "plan_summary.json")) {
      std::ifstream in(dir / "plan_summary.json");
      const auto j = json::parse(in);
      for (const auto& p : j.at("plans")) {
        if (!p.contains("objective")) continue;
        const int type = p.at("battery_type").get<int>();
        const auto problem = with_battery_type(ctx.problem, type, cfg.capacity_year_cap);
        const auto plan = report::read_plan((dir / ("dispatch_type" + std::to_string(type) + ".csv")).string(), problem,
                                            p.at("capacity_per_year_kwh").get<std::vector<double>>(),
                                            p.at("objective").get<double>());
        auto issues = verify_plan(problem, plan, cfg.solver.feas_tol, cfg.solver.int_tol);
        ++checked;
        os << "plan type " << type << "h: " << (issues.empty() ? "ok" : "FAILED") << '\n';
        for (const auto& i : issues) os << "  " << i << '\n';
        failures += !issues.empty();
      }
    }
    if (igdt_curve && fs::exists(dir / "igdt_curve.csv")) {
      std::ifstream in(dir / "igdt_curve.json");
      if (!in) throw InputError("igdt_curve.json missing next to igdt_curve.csv");
      const auto j = json::parse(in);
      const int type = j.at("battery_type").get<int>();
      const double objective = j.at("objective").get<double>();
      const auto problem = with_battery_type(ctx.problem, type, cfg.capacity_year_cap);
      auto opt = cfg.igdt_options;
      opt.solver = cfg.solver;
      for (const auto& r : report::read_igdt_csv((dir / "igdt_curve.csv").string())) {
        const auto msg = igdt::band_check(problem, objective, r, opt);
        ++checked;
        os << "igdt beta=" << csv::format_double(r.beta) << ' ' << igdt::to_string(r.mode) << ' '
           << igdt::to_string(r.param) << " alpha=" << csv::format_double(r.alpha) << ": "
           << (msg.empty() ? "ok" : "FAILED " + msg) << '\n';
        failures += !msg.empty();
      }
    }
    if (checked == 0) throw InputError("nothing to check in " + dir.string());
    os << checked - failures << '/' << checked << " checks passed\n";
    return failures == 0 ? kExitOk : kExitSolve;
  });
}

}  // namespace gridvest::cli
