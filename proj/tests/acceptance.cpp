// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "gridvest/gridvest.hpp"
#include "support/arbitrage_dp.hpp"
#include "support/dense_lp.hpp"
#include "support/instances.hpp"
#include "support/invariants.hpp"
#include "support/random_milp.hpp"

using namespace gridvest;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (!pass) detail << "; ";
      else detail.str("");
      pass = false;
      detail << what;
    }
  }
};

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

bool rel_close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

std::string num(double v, int prec = 6) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

// Dispatch invariant bookkeeping shared by every criterion that solves a plan.
struct InvariantLog {
  std::mutex mu;
  long plans = 0;
  std::vector<std::string> issues;
  void check(const PlanningProblem& p, const PlanSolution& sol, const std::string& label) {
    const auto found = oracle::check_dispatch(p, sol);
    std::lock_guard lock(mu);
    ++plans;
    for (const auto& i : found) issues.push_back(label + ": " + i);
  }
} g_invariants;

PlanningProblem synthetic_problem(int years, int type, bool curtail) {
  RunConfig cfg;
  cfg.years = years;
  cfg.curtailment = curtail;
  cfg.battery_types = {type};
  return load_context(cfg).problem;
}

// Reference battery prices typed by hand, independently of the data file and the built-in copy.
constexpr int kTable[15][5] = {
    {2023, 935, 676, 549, 487}, {2024, 879, 635, 516, 458}, {2025, 830, 600, 487, 433},
    {2026, 786, 568, 461, 410}, {2027, 791, 554, 448, 397}, {2028, 773, 539, 441, 396},
    {2029, 755, 525, 427, 383}, {2030, 737, 510, 414, 371}, {2031, 719, 496, 401, 358},
    {2032, 701, 481, 388, 345}, {2033, 683, 467, 374, 332}, {2034, 665, 453, 361, 320},
    {2035, 647, 438, 348, 307}, {2036, 629, 424, 335, 294}, {2037, 612, 410, 322, 282},
};

void solver_oracle(Outcome& o) {
  double bb = 0.0;
  int feasible = 0, mismatches = 0, max_bins = 0, max_cont = 0, max_rows = 0;
  const auto t0 = Clock::now();
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto m = oracle::random_milp(seed);
    max_bins = std::max(max_bins, m.num_binaries());
    max_cont = std::max(max_cont, m.num_vars() - m.num_binaries());
    max_rows = std::max(max_rows, m.num_constraints());
    const auto t1 = Clock::now();
    const auto s = milp::solve_milp(m);
    bb += since(t1);
    const auto e = oracle::enumerate_binaries(m);
    if (e.status == oracle::LpStatus::kOptimal) {
      ++feasible;
      const bool ok = s.status == milp::SolveStatus::kOptimal && rel_close(s.objective, e.objective, 1e-6) &&
                      milp::is_feasible(m, s.values, 1e-7, 1e-6);
      if (!ok) {
        ++mismatches;
        o.require(false, "seed " + std::to_string(seed) + " differs from enumeration");
      }
    } else if (s.status != milp::SolveStatus::kInfeasible) {
      ++mismatches;
      o.require(false, "seed " + std::to_string(seed) + " should be infeasible");
    }
  }
  o.require(max_bins <= 10 && max_cont <= 12 && max_rows <= 20, "instance exceeds the size limits");
  o.require(bb < 10.0, "branch and bound took " + num(bb) + " s");
  if (o.pass)
    o.detail << "100 instances (" << feasible << " feasible, <=" << max_bins << " binaries, <=" << max_cont
             << " continuous, <=" << max_rows << " rows) match 2^k enumeration; B&B " << num(bb, 3)
             << " s, total with enumeration " << num(since(t0), 3) << " s";
}

void planner_closed_form(Outcome& o) {
  auto inst = oracle::flat_price_instance(15);
  const auto sol = solve_plan(inst.problem);
  o.require(sol.ok(), "solve failed");
  if (!sol.ok()) return;
  g_invariants.check(inst.problem, sol, "flat-price Y=15");
  const double rel = std::abs(sol.objective - inst.analytic) / inst.analytic;
  o.require(sol.total_capacity() == 0.0, "capacity " + num(sol.total_capacity()));
  o.require(rel <= 1e-8, "relative error " + num(rel));
  o.require(rel_close(sol.solver_objective, inst.analytic, 1e-8), "solver objective off");
  if (o.pass) o.detail << "Y=15 Cap=0, objective " << num(sol.objective, 12) << " vs analytic rel err " << num(rel, 3);
}

void planner_arbitrage(Outcome& o) {
  const auto t0 = Clock::now();
  const auto inst = oracle::arbitrage_instance(0.95, 0.95);
  const auto sol = solve_plan(inst.problem);
  o.require(sol.ok(), "solve failed");
  if (!sol.ok()) return;
  g_invariants.check(inst.problem, sol, "arbitrage");
  const auto dp = oracle::solve_arbitrage(inst.day);
  const double gamma = 1.0 / 1.03, weight = 90.0;
  double disc = 0.0;
  for (double p : inst.day.price) disc += p * 2.0 * inst.day.step / inst.day.eta_ch;
  const double slack = gamma * inst.battery_cost * inst.day.capacity;
  const double dp_total = gamma * weight * dp.cost;
  const double elapsed = since(t0);
  // The DP schedule is feasible for the MILP, so the MILP can only be cheaper;
  // the SoC grid can overstate the continuous optimum by at most the bound.
  o.require(sol.objective <= dp_total + slack + 1e-9 * dp_total,
            "MILP " + num(sol.objective, 10) + " above DP " + num(dp_total, 10));
  o.require(sol.objective >= gamma * weight * (dp.cost - disc) - 1e-9,
            "MILP below DP by more than the discretisation bound");
  o.require(sol.total_capacity() > 0.0, "no battery bought");
  o.require(elapsed < 60.0, "took " + num(elapsed) + " s");
  if (o.pass)
    o.detail << "MILP " << num(sol.objective, 10) << " vs DP " << num(dp_total, 10) << " (gap "
             << num(dp_total - sol.objective, 3) << ", bound " << num(gamma * weight * disc + slack, 3) << "), "
             << dp.evaluated << " transitions, " << num(elapsed, 3) << " s";
}

void catalog_fidelity(Outcome& o) {
  const auto cat = load_catalog(std::string(GRIDVEST_SOURCE_DIR) + "/data/table1_catalog.csv", 15);
  int cells = 0;
  for (int y = 0; y < 15; ++y) {
    o.require(cat.base_year() + y == kTable[y][0], "year mismatch");
    for (int k = 0; k < 4; ++k) {
      ++cells;
      o.require(cat.cost(y + 1, kBatteryTypes[k]) == kTable[y][k + 1],
                "cell " + std::to_string(kTable[y][0]) + "/" + std::to_string(kBatteryTypes[k]) + "h");
    }
  }
  if (o.pass)
    o.detail << cells << " cells exact (2023/1h = " << cat.cost(1, 1) << ", 2037/8h = " << cat.cost(15, 8) << ")";
}

void pv_model(Outcome& o) {
  PvParams stc;
  stc.rating = 100.0;
  stc.efficiency = 1.0;
  stc.noct = 20.0;
  const double identity = pv_power(stc.t_stc, stc.i_stc, stc);
  o.require(std::abs(identity - 100.0) <= 1e-9, "STC identity " + num(identity, 15));
  PvParams p;
  o.require(pv_power(30.0, 0.0, p) == 0.0, "zero irradiance gives nonzero output");
  PvParams h;
  h.rating = 100.0;
  h.efficiency = 0.95;
  h.derating = 0.004;
  h.noct = 44.0;
  const double hand = pv_power(30.0, 500.0, h);
  o.require(std::abs(hand - 43.7) <= 1e-9, "hand example " + num(hand, 15));
  if (o.pass) o.detail << "STC " << num(identity, 15) << " kW, dark 0 kW, hand example " << num(hand, 15) << " kW";
}

void igdt_anchors(Outcome& o) {
  auto problem = synthetic_problem(3, 4, true);
  const auto anchor = solve_plan(problem);
  o.require(anchor.ok(), "anchor solve failed");
  if (!anchor.ok()) return;
  g_invariants.check(problem, anchor, "igdt anchor");
  const double obj = anchor.objective;

  const auto zero = igdt::sweep(problem, obj, igdt::DeviationGrid{{0.0}, igdt::Mode::kBoth,
                                                                 igdt::Coupling::kIndependent});
  o.require(zero.results.size() == 4, "beta=0 sweep has " + std::to_string(zero.results.size()) + " rows");
  for (const auto& r : zero.results) o.require(r.alpha == 0.0 && r.error.empty(), "beta=0 radius is not 0");

  const igdt::DeviationGrid grid{{0.02, 0.05, 0.1, 0.2}, igdt::Mode::kBoth, igdt::Coupling::kIndependent};
  const auto t0 = Clock::now();
  const auto curve = igdt::sweep(problem, obj, grid);
  const double elapsed = since(t0);
  o.require(curve.results.size() == 16, "sweep has " + std::to_string(curve.results.size()) + " rows");
  o.require(elapsed < 300.0, "sweep took " + num(elapsed) + " s");

  std::ostringstream radii;
  for (auto param : {igdt::Param::kEv, igdt::Param::kPv}) {
    double last = -1.0;
    radii << ' ' << igdt::to_string(param) << " robust";
    for (const auto& r : curve.results) {
      if (r.param != param || r.mode != igdt::Mode::kRobust) continue;
      o.require(r.error.empty(), "radius failed: " + r.error);
      o.require(r.alpha >= last, std::string("robust ") + igdt::to_string(param) + " radius decreases");
      last = r.alpha;
      radii << ' ' << num(r.alpha, 4);
    }
  }
  int banded = 0;
  for (const auto& r : curve.results) {
    const auto msg = igdt::band_check(problem, obj, r);
    o.require(msg.empty(), "band check beta=" + num(r.beta) + " " + igdt::to_string(r.mode) + " " +
                               igdt::to_string(r.param) + ": " + msg);
    ++banded;
  }
  if (o.pass)
    o.detail << "beta=0 radii all 0; 16-row sweep in " << num(elapsed, 3) << " s;" << radii.str() << "; " << banded
             << " radii pass the band check";
}

void igdt_closed_form(Outcome& o) {
  const auto inst = oracle::linear_igdt_instance();
  const auto anchor = solve_plan(inst.problem);
  o.require(anchor.ok(), "anchor failed");
  if (!anchor.ok()) return;
  g_invariants.check(inst.problem, anchor, "linear igdt");
  double worst = 0.0;
  int count = 0;
  for (double beta : {0.02, 0.05, 0.1, 0.2}) {
    for (auto param : {igdt::Param::kEv, igdt::Param::kPv}) {
      const double analytic = param == igdt::Param::kEv ? inst.ev_radius(beta) : inst.pv_radius(beta);
      for (auto mode : {igdt::Mode::kRobust, igdt::Mode::kOpportunity}) {
        const auto r = mode == igdt::Mode::kRobust
                           ? igdt::robust_radius(inst.problem, anchor.objective, beta, param)
                           : igdt::opportunity_radius(inst.problem, anchor.objective, beta, param);
        const double err = std::abs(r.alpha - analytic);
        worst = std::max(worst, err);
        ++count;
        o.require(err <= 1e-3, std::string(igdt::to_string(mode)) + " " + igdt::to_string(param) + " beta=" +
                                   num(beta) + ": " + num(r.alpha) + " vs " + num(analytic));
      }
    }
  }
  if (o.pass) o.detail << count << " radii within " << num(worst, 3) << " of the analytic values";
}

void cashflow_identities(Outcome& o) {
  int reference = 0;
  std::ostringstream winners;
  double worst = 0.0;
  for (double scale : {0.5, 1.0, 3.0}) {
    RunConfig cfg;
    cfg.cost_scale = scale;
    const auto ctx = load_context(cfg);
    const auto baseline = solve_baseline(ctx.problem);
    o.require(baseline.ok(), "baseline failed");
    if (!baseline.ok()) return;
    g_invariants.check(ctx.problem, baseline, "baseline scale " + num(scale));
    const auto results = compare_types(ctx.problem, cfg.battery_types);
    for (const auto& r : results) {
      o.require(r.ok(), "type " + std::to_string(r.battery_type) + " failed: " + r.error);
      if (!r.ok()) continue;
      g_invariants.check(with_battery_type(ctx.problem, r.battery_type), r.plan,
                         "type " + std::to_string(r.battery_type) + " scale " + num(scale));
      const auto rep = cashflow::build_report(baseline, r.plan);
      const double rel = std::abs(rep.total_cost - r.plan.solver_objective) / std::abs(r.plan.solver_objective);
      worst = std::max(worst, rel);
      o.require(rel <= 1e-9, "total cost differs from the planner objective by " + num(rel));
    }
    const int w = results.front().battery_type;
    winners << (scale == 0.5 ? "" : ", ") << "x" << num(scale) << " -> " << w << "h";
    if (reference == 0) reference = w;
    o.require(w == reference, "winner changed at scale " + num(scale));
  }
  if (o.pass)
    o.detail << "Y=15 total_cost matches objective (max rel " << num(worst, 3) << "); winners " << winners.str();
}

std::string read_tail(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  const auto text = ss.str();
  if (p.extension() != ".csv") return text;
  const auto nl = text.find('\n');
  return nl == std::string::npos ? std::string() : text.substr(nl + 1);
}

void end_to_end(Outcome& o) {
  const auto root = fs::current_path() / "acceptance_out";
  fs::remove_all(root);
  double times[2] = {0.0, 0.0};
  for (int run = 0; run < 2; ++run) {
    RunConfig cfg = load_config(std::string(GRIDVEST_SOURCE_DIR) + "/configs/default.json");
    cfg.output_dir = (root / ("run" + std::to_string(run))).string();
    std::ostringstream os, err;
    const auto t0 = Clock::now();
    const int code = cli::cmd_plan(cfg, os, err);
    times[run] = since(t0);
    o.require(code == cli::kExitOk, "plan exited " + std::to_string(code) + ": " + err.str());
    o.require(times[run] < 60.0, "run took " + num(times[run]) + " s");
    if (code != cli::kExitOk) return;
    if (run == 0) {
      // Read every written plan back and re-check its dispatch.
      const auto ctx = load_context(cfg);
      std::ifstream in(fs::path(cfg.output_dir) / "plan_summary.json");
      const auto j = nlohmann::json::parse(in);
      for (const auto& p : j.at("plans")) {
        const int type = p.at("battery_type").get<int>();
        const auto problem = with_battery_type(ctx.problem, type);
        auto plan = report::read_plan(
            (fs::path(cfg.output_dir) / ("dispatch_type" + std::to_string(type) + ".csv")).string(), problem,
            p.at("capacity_per_year_kwh").get<std::vector<double>>(), p.at("objective").get<double>());
        g_invariants.check(problem, plan, "cli type " + std::to_string(type));
      }
      o.require(j.at("summary").size() == 5, "summary does not have five rows");
    }
  }
  const std::vector<std::string> required = {
      "table1_capacity_kwh.csv",         "table2_capex_kusd.csv",          "table3_opex_no_battery_kusd.csv",
      "table4_opex_with_battery_kusd.csv", "table5_total_cost.csv",        "cashflow_type1.csv",
      "cashflow_type2.csv",              "cashflow_type4.csv",             "cashflow_type8.csv",
      "cashflow_details.csv",            "plan_summary.json",              "dispatch_no_battery.csv"};
  for (const auto& f : required) o.require(fs::exists(root / "run0" / f), "missing " + f);
  int compared = 0;
  for (const auto& entry : fs::directory_iterator(root / "run0")) {
    const auto other = root / "run1" / entry.path().filename();
    o.require(fs::exists(other), "second run lacks " + entry.path().filename().string());
    o.require(read_tail(entry.path()) == read_tail(other), entry.path().filename().string() + " differs");
    ++compared;
  }
  if (o.pass)
    o.detail << "runs took " << num(times[0], 3) << " s and " << num(times[1], 3) << " s; " << compared
             << " files identical after the stamp line";
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    std::function<void(Outcome&)> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "solver oracle", solver_oracle},
      {2, "planner closed form", planner_closed_form},
      {3, "planner arbitrage oracle", planner_arbitrage},
      {5, "catalog fidelity", catalog_fidelity},
      {6, "PV model", pv_model},
      {7, "IGDT anchors and monotonicity", igdt_anchors},
      {8, "IGDT closed form", igdt_closed_form},
      {9, "cash-flow identities", cashflow_identities},
      {10, "end-to-end desk-scale run", end_to_end},
  };
  std::vector<std::pair<int, std::string>> lines;
  int failures = 0;
  auto emit = [&](int id, const char* title, Outcome& o) {
    std::ostringstream line;
    line << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << title << ": " << o.detail.str();
    lines.emplace_back(id, line.str());
    failures += !o.pass;
  };
  for (const auto& c : criteria) {
    Outcome o;
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    emit(c.id, c.title, o);
  }
  Outcome inv;
  inv.require(g_invariants.plans > 0, "no plans were checked");
  for (const auto& i : g_invariants.issues) inv.require(false, i);
  if (inv.pass)
    inv.detail << g_invariants.plans
               << " solved plans: no export, no simultaneous charge/discharge, SoC and rate bounds, "
                  "daily energy balance and cost audit all hold";
  emit(4, "dispatch invariants", inv);

  std::sort(lines.begin(), lines.end());
  for (const auto& [id, line] : lines) std::cout << line << '\n';
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
