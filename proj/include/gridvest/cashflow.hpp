#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "gridvest/error.hpp"
#include "gridvest/planner.hpp"

namespace gridvest::cashflow {

/// Cumulative profit per year. Default: running sum of yearly savings
/// (no-battery Opex minus with-battery Opex). `literal` instead subtracts only
/// the current year's with-battery Opex from the running no-battery sum.
inline std::vector<double> profit_series(const std::vector<double>& no_battery, const std::vector<double>& with_battery,
                                         bool literal = false) {
  if (no_battery.size() != with_battery.size())
    throw InputError("profit series: Opex series lengths differ (" + std::to_string(no_battery.size()) + " vs " +
                     std::to_string(with_battery.size()) + ")");
  std::vector<double> out(no_battery.size());
  double base = 0.0, saved = 0.0;
  for (std::size_t y = 0; y < no_battery.size(); ++y) {
    base += no_battery[y];
    saved += no_battery[y] - with_battery[y];
    out[y] = literal ? base - with_battery[y] : saved;
  }
  return out;
}

/// First 1-based year whose cumulative profit covers the cumulative Capex.
inline std::optional<int> breakeven(const std::vector<double>& profit, const std::vector<double>& capex_cumulative) {
  const auto n = std::min(profit.size(), capex_cumulative.size());
  for (std::size_t y = 0; y < n; ++y) {
    if (profit[y] <= 0.0 && capex_cumulative[y] <= 0.0) continue;  // nothing invested, nothing earned yet
    if (profit[y] >= capex_cumulative[y]) return static_cast<int>(y) + 1;
  }
  return std::nullopt;
}

inline std::vector<double> running_sum(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = acc += v[i];
  return out;
}

inline double sum(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc;
}

struct CashflowReport {
  int battery_type = 0;
  std::vector<double> opex_no_battery, opex_with_battery, capex;  // per year
  std::vector<double> cumulative_profit, cumulative_capex;
  std::optional<int> breakeven_year;
  double total_cost = 0.0;    // Capex + Opex over the horizon
  double total_profit = 0.0;  // no-battery Opex minus total_cost
};

/// `nominal` switches every series to undiscounted dollars.
inline CashflowReport build_report(const PlanSolution& baseline, const PlanSolution& plan, bool nominal = false,
                                   bool literal = false) {
  CashflowReport r;
  r.battery_type = plan.battery_type;
  r.opex_no_battery = nominal ? baseline.opex_per_year_nominal : baseline.opex_per_year;
  r.opex_with_battery = nominal ? plan.opex_per_year_nominal : plan.opex_per_year;
  r.capex = nominal ? plan.capex_per_year_nominal : plan.capex_per_year;
  r.cumulative_profit = profit_series(r.opex_no_battery, r.opex_with_battery, literal);
  r.cumulative_capex = running_sum(r.capex);
  r.breakeven_year = breakeven(r.cumulative_profit, r.cumulative_capex);
  r.total_cost = sum(r.capex) + sum(r.opex_with_battery);
  r.total_profit = sum(r.opex_no_battery) - r.total_cost;
  return r;
}

struct SummaryRow {
  std::string method;
  int battery_type = 0;  // 0: no battery
  double capex = 0.0, opex = 0.0, total_cost = 0.0;
  std::optional<double> profit, profit_nominal;
  std::optional<int> breakeven_year;
  bool winner = false;
  std::string error;
};

/// One row for the baseline followed by one per requested type in type
/// order. The winner is the cheapest solved type.
inline std::vector<SummaryRow> summary_report(const PlanSolution& baseline, const std::vector<TypeResult>& results) {
  std::vector<SummaryRow> rows;
  SummaryRow base;
  base.method = "No battery";
  base.opex = baseline.opex;
  base.total_cost = baseline.objective;
  rows.push_back(base);

  auto sorted = results;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const TypeResult& a, const TypeResult& b) { return a.battery_type < b.battery_type; });
  const TypeResult* best = nullptr;
  for (const auto& r : sorted)
    if (r.ok() && (!best || r.plan.objective < best->plan.objective)) best = &r;
  const double base_nominal = sum(baseline.opex_per_year_nominal);
  for (const auto& r : sorted) {
    SummaryRow row;
    row.method = "Battery type " + std::to_string(r.battery_type);
    row.battery_type = r.battery_type;
    row.error = r.error;
    if (r.ok()) {
      row.capex = r.plan.capex;
      row.opex = r.plan.opex;
      row.total_cost = r.plan.objective;
      row.profit = baseline.objective - r.plan.objective;
      row.profit_nominal = base_nominal - sum(r.plan.capex_per_year_nominal) - sum(r.plan.opex_per_year_nominal);
      row.breakeven_year = build_report(baseline, r.plan).breakeven_year;
      row.winner = &r == best;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace gridvest::cashflow
