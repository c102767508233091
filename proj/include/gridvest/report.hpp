#pragma once

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gridvest/cashflow.hpp"
#include "gridvest/csv.hpp"
#include "gridvest/error.hpp"
#include "gridvest/igdt.hpp"
#include "gridvest/planner.hpp"

namespace gridvest::report {

using nlohmann::json;

/// First line of every CSV report. Re-runs differ only in this line.
inline std::string stamp_line(std::uint64_t seed) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return std::string("# generated ") + buf + " seed=" + std::to_string(seed);
}

class CsvWriter {
public:
  CsvWriter(const std::filesystem::path& path, const std::string& stamp, const std::vector<std::string>& header)
      : out_(path), path_(path.string()) {
    if (!out_) throw InputError("cannot write " + path_);
    out_ << stamp << '\n' << csv::join(header) << '\n';
  }
  void row(const std::vector<std::string>& fields) { out_ << csv::join(fields) << '\n'; }

private:
  std::ofstream out_;
  std::string path_;
};

inline std::string fmt(double v) { return csv::format_double(v); }
inline std::string fixed(double v, int prec = 3) { return csv::format_fixed(v, prec); }

inline std::vector<std::string> year_header(const char* first, int years) {
  std::vector<std::string> h{first};
  for (int y = 1; y <= years; ++y) h.push_back("Y" + std::to_string(y));
  return h;
}

inline void write_dispatch(const std::filesystem::path& path, const std::string& stamp, const PlanningProblem& p,
                           const PlanSolution& plan) {
  CsvWriter w(path, stamp, {"y", "q", "d", "t", "p_pv", "p_utility", "p_ch", "p_dis", "soc", "curtail"});
  const auto& d = plan.dispatch;
  for (std::size_t s = 0; s < d.utility.size(); ++s) {
    const auto c = p.grid().coord(s);
    w.row({std::to_string(c.year), std::to_string(c.quarter), std::to_string(c.day), std::to_string(c.hour),
           fmt(d.pv[s]), fmt(d.utility[s]), fmt(d.charge[s]), fmt(d.discharge[s]), fmt(d.soc[s]), fmt(d.curtail[s])});
  }
}

inline json plan_json(const PlanSolution& plan) {
  json j;
  j["battery_type"] = plan.battery_type;
  j["status"] = milp::to_string(plan.status);
  if (!plan.diagnostics.empty()) j["diagnostics"] = plan.diagnostics;
  if (!plan.ok()) return j;
  j["capacity_per_year_kwh"] = plan.cap_per_year;
  j["capacity_cumulative_kwh"] = plan.cap_cumulative;
  j["capex_per_year"] = plan.capex_per_year;
  j["opex_per_year"] = plan.opex_per_year;
  j["capex_per_year_nominal"] = plan.capex_per_year_nominal;
  j["opex_per_year_nominal"] = plan.opex_per_year_nominal;
  j["capex"] = plan.capex;
  j["opex"] = plan.opex;
  j["objective"] = plan.objective;
  j["solver_objective"] = plan.solver_objective;
  j["mip_gap"] = plan.mip_gap;
  j["nodes"] = plan.nodes;
  j["simplex_iterations"] = plan.iterations;
  return j;
}

/// Tables I-IV: one row per type, one column per year.
inline void write_year_tables(const std::filesystem::path& dir, const std::string& stamp, const PlanSolution& baseline,
                              const std::vector<TypeResult>& results, int years) {
  auto sorted = results;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const TypeResult& a, const TypeResult& b) { return a.battery_type < b.battery_type; });
  auto table = [&](const char* name, auto&& series, double scale) {
    CsvWriter w(dir / name, stamp, year_header("type", years));
    for (const auto& r : sorted) {
      std::vector<std::string> row{std::to_string(r.battery_type)};
      if (!r.ok()) {
        row.resize(years + 1, "");
      } else {
        for (double v : series(r)) row.push_back(fixed(v * scale));
      }
      w.row(row);
    }
  };
  table("table1_capacity_kwh.csv", [](const TypeResult& r) { return r.plan.cap_per_year; }, 1.0);
  table("table2_capex_kusd.csv", [](const TypeResult& r) { return r.plan.capex_per_year; }, 1e-3);
  table("table2_capex_nominal_kusd.csv", [](const TypeResult& r) { return r.plan.capex_per_year_nominal; }, 1e-3);
  table("table3_opex_no_battery_kusd.csv", [&](const TypeResult&) { return baseline.opex_per_year; }, 1e-3);
  table("table3_opex_no_battery_nominal_kusd.csv", [&](const TypeResult&) { return baseline.opex_per_year_nominal; },
        1e-3);
  table("table4_opex_with_battery_kusd.csv", [](const TypeResult& r) { return r.plan.opex_per_year; }, 1e-3);
  table("table4_opex_with_battery_nominal_kusd.csv", [](const TypeResult& r) { return r.plan.opex_per_year_nominal; },
        1e-3);
}

/// Summary table: total cost and profit per method, winner flagged.
inline void write_summary_table(const std::filesystem::path& path, const std::string& stamp,
                                const std::vector<cashflow::SummaryRow>& rows) {
  CsvWriter w(path, stamp, {"method", "capex", "opex", "total_cost", "profit", "profit_nominal", "breakeven_year",
                            "winner"});
  for (const auto& r : rows) {
    const bool failed = !r.error.empty();
    w.row({r.method, failed ? "" : fixed(r.capex, 2), failed ? "" : fixed(r.opex, 2),
           failed ? "" : fixed(r.total_cost, 2), r.profit ? fixed(*r.profit, 2) : "",
           r.profit_nominal ? fixed(*r.profit_nominal, 2) : "",
           r.breakeven_year ? std::to_string(*r.breakeven_year) : "", r.winner ? "yes" : ""});
  }
}

inline json summary_json(const std::vector<cashflow::SummaryRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    json j;
    j["method"] = r.method;
    j["battery_type"] = r.battery_type;
    if (!r.error.empty()) {
      j["error"] = r.error;
    } else {
      j["capex"] = r.capex;
      j["opex"] = r.opex;
      j["total_cost"] = r.total_cost;
    }
    j["profit"] = r.profit ? json(*r.profit) : json(nullptr);
    j["profit_nominal"] = r.profit_nominal ? json(*r.profit_nominal) : json(nullptr);
    j["breakeven_year"] = r.breakeven_year ? json(*r.breakeven_year) : json(nullptr);
    j["winner"] = r.winner;
    arr.push_back(j);
  }
  return arr;
}

/// Bar-chart data: yearly with-battery Opex as bars, total Capex as the line.
inline void write_cashflow_chart(const std::filesystem::path& path, const std::string& stamp,
                                 const cashflow::CashflowReport& r) {
  CsvWriter w(path, stamp, {"year", "opex", "capex_line"});
  const double capex = cashflow::sum(r.capex);
  for (std::size_t y = 0; y < r.opex_with_battery.size(); ++y)
    w.row({std::to_string(y + 1), fixed(r.opex_with_battery[y], 2), fixed(capex, 2)});
}

/// Per-year cash flow for every type, discounted rows first, then nominal.
inline void write_cashflow_details(const std::filesystem::path& path, const std::string& stamp,
                                   const std::vector<cashflow::CashflowReport>& discounted,
                                   const std::vector<cashflow::CashflowReport>& nominal) {
  CsvWriter w(path, stamp, {"type", "basis", "year", "opex_no_battery", "opex_with_battery", "capex",
                            "cumulative_profit", "cumulative_capex"});
  for (const auto* set : {&discounted, &nominal})
    for (const auto& r : *set)
      for (std::size_t y = 0; y < r.opex_with_battery.size(); ++y)
        w.row({std::to_string(r.battery_type), set == &discounted ? "discounted" : "nominal", std::to_string(y + 1),
               fixed(r.opex_no_battery[y], 2), fixed(r.opex_with_battery[y], 2), fixed(r.capex[y], 2),
               fixed(r.cumulative_profit[y], 2), fixed(r.cumulative_capex[y], 2)});
}

inline json cashflow_json(const cashflow::CashflowReport& r) {
  json j;
  j["battery_type"] = r.battery_type;
  j["opex_no_battery"] = r.opex_no_battery;
  j["opex_with_battery"] = r.opex_with_battery;
  j["capex"] = r.capex;
  j["cumulative_profit"] = r.cumulative_profit;
  j["cumulative_capex"] = r.cumulative_capex;
  j["breakeven_year"] = r.breakeven_year ? json(*r.breakeven_year) : json(nullptr);
  j["total_cost"] = r.total_cost;
  j["total_profit"] = r.total_profit;
  return j;
}

inline const std::vector<std::string>& igdt_header() {
  static const std::vector<std::string> h{"beta", "param", "mode", "alpha", "achieved_cost", "iterations", "flags"};
  return h;
}

inline void write_igdt_csv(const std::filesystem::path& path, const std::string& stamp, const igdt::IgdtCurve& curve) {
  CsvWriter w(path, stamp, igdt_header());
  for (const auto& r : curve.results)
    w.row({fmt(r.beta), igdt::to_string(r.param), igdt::to_string(r.mode), fmt(r.alpha), fixed(r.achieved_cost, 2),
           std::to_string(r.iterations), r.flags()});
}

inline json igdt_json(const igdt::IgdtCurve& curve, int battery_type) {
  json j;
  j["battery_type"] = battery_type;
  j["objective"] = curve.objective;
  j["mode"] = igdt::to_string(curve.grid.mode);
  j["coupling"] = igdt::to_string(curve.grid.coupling);
  j["betas"] = curve.grid.betas;
  json rows = json::array();
  for (const auto& r : curve.results) {
    json x;
    x["beta"] = r.beta;
    x["param"] = igdt::to_string(r.param);
    x["mode"] = igdt::to_string(r.mode);
    x["coupling"] = igdt::to_string(r.coupling);
    x["alpha"] = r.alpha;
    x["alpha_pv"] = r.alpha_pv;
    x["alpha_ev"] = r.alpha_ev;
    x["achieved_cost"] = r.achieved_cost;
    x["iterations"] = r.iterations;
    x["saturated"] = r.saturated;
    x["unattainable"] = r.unattainable;
    if (!r.error.empty()) x["error"] = r.error;
    rows.push_back(x);
  }
  j["results"] = rows;
  return j;
}

/// Reads back an IGDT CSV written by write_igdt_csv.
inline std::vector<igdt::RadiusResult> read_igdt_csv(const std::string& path) {
  const auto t = csv::read_file(path);
  if (t.header != igdt_header()) throw InputError(path + ": not an IGDT curve file");
  std::vector<igdt::RadiusResult> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const auto where = path + ":" + std::to_string(t.line_numbers[i]);
    if (row.size() != 7) throw InputError(where + ": malformed row");
    igdt::RadiusResult r;
    auto beta = csv::parse_double(row[0]), alpha = csv::parse_double(row[3]), cost = csv::parse_double(row[4]);
    auto iters = csv::parse_int(row[5]);
    if (!beta || !alpha || !cost || !iters) throw InputError(where + ": malformed number");
    r.beta = *beta;
    r.param = igdt::parse_param(row[1]);
    r.mode = igdt::parse_mode(row[2]);
    r.coupling = r.param == igdt::Param::kJoint ? igdt::Coupling::kJoint : igdt::Coupling::kIndependent;
    r.alpha = *alpha;
    std::tie(r.alpha_pv, r.alpha_ev) = igdt::detail::split_alpha(r.param, r.alpha);
    r.achieved_cost = *cost;
    r.iterations = *iters;
    for (auto f : csv::split(row[6], '|')) {
      if (f == "saturated") r.saturated = true;
      if (f == "unattainable") r.unattainable = true;
      if (f == "failed") r.error = "failed during sweep";
    }
    out.push_back(r);
  }
  return out;
}

/// Rebuilds a plan from a dispatch CSV plus per-year capacities (the summary
/// JSON's capacity_per_year_kwh) so it can be re-verified independently.
inline PlanSolution read_plan(const std::string& dispatch_path, const PlanningProblem& p,
                              const std::vector<double>& cap_per_year, double reported_objective) {
  const auto t = csv::read_file(dispatch_path);
  const std::vector<std::string> header{"y", "q", "d", "t", "p_pv", "p_utility", "p_ch", "p_dis", "soc", "curtail"};
  if (t.header != header) throw InputError(dispatch_path + ": not a dispatch file");
  const auto& grid = p.grid();
  if (t.rows.size() != grid.slot_count() || cap_per_year.size() != static_cast<std::size_t>(grid.years()))
    throw InputError(dispatch_path + ": plan shape does not match the configured time grid");
  PlanSolution plan;
  plan.battery_type = p.battery_type;
  plan.status = milp::SolveStatus::kOptimal;
  plan.cap_per_year = cap_per_year;
  plan.cap_cumulative = cashflow::running_sum(cap_per_year);
  auto& d = plan.dispatch;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const auto where = dispatch_path + ":" + std::to_string(t.line_numbers[i]);
    if (row.size() != header.size()) throw InputError(where + ": malformed row");
    std::array<int, 4> c{};
    for (int k = 0; k < 4; ++k) {
      auto v = csv::parse_int(row[k]);
      if (!v) throw InputError(where + ": malformed slot index");
      c[k] = *v;
    }
    if (grid.index({c[0], c[1], c[2], c[3]}) != i) throw InputError(where + ": rows out of grid order");
    std::array<double, 6> v{};
    for (int k = 0; k < 6; ++k) {
      auto x = csv::parse_double(row[4 + k]);
      if (!x) throw InputError(where + ": malformed value");
      v[k] = *x;
    }
    d.pv.push_back(v[0]);
    d.utility.push_back(v[1]);
    d.charge.push_back(v[2]);
    d.discharge.push_back(v[3]);
    d.soc.push_back(v[4]);
    d.curtail.push_back(v[5]);
    d.indicator.push_back(v[2] > 0.0 ? 1.0 : 0.0);
  }
  plan.solver_objective = reported_objective;
  audit_costs(p, plan);
  return plan;
}

}  // namespace gridvest::report
