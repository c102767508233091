#pragma once

// Dispatch checks recomputed from the raw plan values, independent of
// verify_plan in the library.

#include <atomic>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "gridvest/planner.hpp"

namespace oracle {

struct InvariantTolerances {
  double no_export = 1e-7;
  double daily_energy = 24 * 1e-7;
  double objective_rel = 1e-6;
  double int_tol = 1e-6;
  double soc = 1e-7;
};

/// Counts every plan that went through check_dispatch in this process.
inline std::atomic<long>& checked_plans() {
  static std::atomic<long> n{0};
  return n;
}

inline std::vector<std::string> check_dispatch(const gridvest::PlanningProblem& p, const gridvest::PlanSolution& sol,
                                               const InvariantTolerances& tol = {}) {
  ++checked_plans();
  std::vector<std::string> out;
  auto fail = [&](const std::string& what) { out.push_back(what); };
  const auto& grid = p.grid();
  const auto& sc = *p.scenario;
  const auto& d = sol.dispatch;
  const auto n = grid.slot_count();
  if (d.utility.size() != n || d.charge.size() != n || d.discharge.size() != n || d.soc.size() != n) {
    fail("dispatch length mismatch");
    return out;
  }
  const double eta_ch = p.catalog.charge_eff(), eta_dis = p.catalog.discharge_eff();
  const double b = p.battery_type;

  std::vector<double> cum(grid.years());
  double run = 0.0;
  for (int y = 0; y < grid.years(); ++y) cum[y] = run += sol.cap_per_year[y];

  double min_util = 1e300;
  long both = 0;
  const double on = tol.int_tol * p.big_m;
  for (std::size_t s = 0; s < n; ++s) {
    const double cap = cum[grid.year_of(s) - 1];
    const double scale = std::max(1.0, cap);
    min_util = std::min(min_util, d.utility[s]);
    if (d.charge[s] > on && d.discharge[s] > on) ++both;
    if (d.soc[s] < -tol.soc * scale || d.soc[s] > cap + tol.soc * scale) {
      std::ostringstream os;
      os << "SoC " << d.soc[s] << " outside [0, " << cap << "] at " << grid.coord(s).str();
      fail(os.str());
    }
    if (d.charge[s] > cap / b + tol.soc * scale || d.discharge[s] > cap / b + tol.soc * scale)
      fail("rate limit exceeded at " + grid.coord(s).str());
    const double curt = d.curtail.empty() ? 0.0 : d.curtail[s];
    const double resid =
        p.pv(s) + d.utility[s] - d.charge[s] + d.discharge[s] - curt - sc.residential_load[s] - p.ev(s);
    if (std::abs(resid) > 1e-6 * std::max(1.0, sc.residential_load[s] + p.ev(s)))
      fail("power balance residual " + std::to_string(resid) + " at " + grid.coord(s).str());
  }
  if (min_util < -tol.no_export) fail("export detected: min utility " + std::to_string(min_util));
  if (both > 0) fail(std::to_string(both) + " slots charge and discharge together");

  for (std::size_t day = 0; day < grid.day_count(); ++day) {
    double e = 0.0;
    for (int h = 0; h < gridvest::kHoursPerDay; ++h) {
      const auto s = day * gridvest::kHoursPerDay + h;
      e += eta_ch * d.charge[s] - d.discharge[s] / eta_dis;
    }
    if (std::abs(e) > tol.daily_energy)
      fail("daily energy imbalance " + std::to_string(e) + " on day block " + std::to_string(day));
  }

  double capex = 0.0, opex = 0.0;
  for (int y = 1; y <= grid.years(); ++y)
    capex += std::pow(1.0 + p.econ.inflation_rate, -y) * p.catalog.cost(y, p.battery_type) * sol.cap_per_year[y - 1];
  for (std::size_t s = 0; s < n; ++s) {
    const int y = grid.year_of(s);
    opex += std::pow(1.0 + p.econ.inflation_rate, -y) * grid.day_weight(grid.coord(s).quarter) *
            sc.utility_price[s] * d.utility[s];
  }
  const double audit = capex + opex;
  if (std::abs(audit - sol.solver_objective) > tol.objective_rel * std::max(1.0, std::abs(audit)))
    fail("objective audit " + std::to_string(audit) + " vs solver " + std::to_string(sol.solver_objective));
  return out;
}

}  // namespace oracle
