#include <random>

#include "catch_amalgamated.hpp"

#include "gridvest/cashflow.hpp"
#include "gridvest/config.hpp"
#include "support/invariants.hpp"

using namespace gridvest;
using namespace gridvest::cashflow;
using Catch::Matchers::WithinRel;

namespace {

struct Solved {
  PlanningProblem problem;
  PlanSolution baseline;
  std::vector<TypeResult> results;
};

Solved solve_synthetic(int years, double cost_scale = 1.0, std::uint64_t seed = 1) {
  RunConfig cfg;
  cfg.years = years;
  cfg.seed = seed;
  cfg.cost_scale = cost_scale;
  const auto ctx = load_context(cfg);
  Solved s{ctx.problem, solve_baseline(ctx.problem), compare_types(ctx.problem, {1, 2, 4, 8})};
  REQUIRE(s.baseline.ok());
  for (const auto& r : s.results) {
    REQUIRE(r.ok());
    CHECK(oracle::check_dispatch(with_battery_type(ctx.problem, r.battery_type), r.plan).empty());
  }
  return s;
}

}  // namespace

TEST_CASE("profit series examples", "[cashflow]") {
  const std::vector<double> same{5.0, 7.0, 9.0};
  CHECK(profit_series(same, same) == std::vector<double>{0.0, 0.0, 0.0});
  CHECK(profit_series({300.0, 300.0, 300.0}, {200.0, 200.0, 200.0}) == std::vector<double>{100.0, 200.0, 300.0});
  CHECK(profit_series({1496.0}, {1476.0}).front() == 20.0);
  // Literal form: running no-battery sum minus only the current year's with-battery Opex.
  CHECK(profit_series({10.0, 10.0}, {8.0, 9.0}, true) == std::vector<double>{2.0, 11.0});
  CHECK_THROWS_AS(profit_series({1.0, 2.0}, {1.0}), InputError);
}

TEST_CASE("break-even examples", "[cashflow]") {
  CHECK(breakeven({10.0, 30.0, 60.0}, {50.0, 50.0, 50.0}) == 3);
  CHECK_FALSE(breakeven({0.0, 0.0, 0.0}, {50.0, 50.0, 50.0}).has_value());
  CHECK_FALSE(breakeven({0.0, 0.0}, {0.0, 0.0}).has_value());
  CHECK(breakeven({5.0, 20.0}, {10.0, 10.0}) == 2);
  CHECK(breakeven({10.0}, {10.0}) == 1);
}

TEST_CASE("cumulative profit is nondecreasing when the battery never costs more", "[cashflow][property]") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1000.0), f(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> no(15), with(15);
    for (int y = 0; y < 15; ++y) {
      no[y] = u(rng);
      with[y] = no[y] * f(rng);
    }
    const auto p = profit_series(no, with);
    for (int y = 1; y < 15; ++y) REQUIRE(p[y] >= p[y - 1]);
    REQUIRE_THAT(p.back(), WithinRel(sum(no) - sum(with), 1e-12));
  }
}

TEST_CASE("reports reconcile with the planner", "[cashflow]") {
  const auto s = solve_synthetic(3);
  for (const auto& r : s.results) {
    const auto rep = build_report(s.baseline, r.plan);
    CHECK_THAT(rep.total_cost, WithinRel(r.plan.solver_objective, 1e-9));
    CHECK_THAT(rep.total_cost, WithinRel(sum(rep.capex) + sum(rep.opex_with_battery), 1e-12));
    CHECK_THAT(rep.total_profit, WithinRel(s.baseline.objective - r.plan.objective, 1e-9));
    CHECK(rep.cumulative_capex.back() == Catch::Approx(r.plan.capex).epsilon(1e-12));
    for (std::size_t y = 0; y < rep.opex_no_battery.size(); ++y)
      CHECK(rep.opex_with_battery[y] <= rep.opex_no_battery[y] * (1.0 + 1e-7));
    const auto nominal = build_report(s.baseline, r.plan, true);
    CHECK(nominal.total_cost >= rep.total_cost);
  }
}

TEST_CASE("summary rows follow the table layout", "[cashflow]") {
  const auto s = solve_synthetic(2);
  const auto rows = summary_report(s.baseline, s.results);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0].method == "No battery");
  CHECK_FALSE(rows[0].profit.has_value());
  CHECK(rows[0].total_cost == s.baseline.objective);
  int winners = 0;
  double best = 1e300;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].battery_type == kBatteryTypes[i - 1]);
    REQUIRE(rows[i].profit.has_value());
    CHECK_THAT(*rows[i].profit, WithinRel(s.baseline.objective - rows[i].total_cost, 1e-12));
    CHECK_THAT(rows[i].total_cost, WithinRel(rows[i].capex + rows[i].opex, 1e-12));
    best = std::min(best, rows[i].total_cost);
    winners += rows[i].winner;
  }
  CHECK(winners == 1);
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].winner) CHECK(rows[i].total_cost == best);
}

TEST_CASE("failed types keep their row without numbers", "[cashflow]") {
  const auto s = solve_synthetic(1);
  auto results = s.results;
  results[0].error = "forced failure";
  const auto rows = summary_report(s.baseline, results);
  int failed = 0;
  for (const auto& r : rows) {
    if (r.error.empty()) continue;
    ++failed;
    CHECK_FALSE(r.profit.has_value());
    CHECK_FALSE(r.winner);
  }
  CHECK(failed == 1);
}

TEST_CASE("the winner is invariant under uniform monetary scaling", "[cashflow][property]") {
  int reference = 0;
  double reference_obj = 0.0;
  for (double scale : {0.5, 1.0, 3.0}) {
    const auto s = solve_synthetic(2, scale);
    const auto& w = s.results.front();
    REQUIRE(w.winner);
    if (reference == 0) {
      reference = w.battery_type;
      reference_obj = w.plan.objective / scale;
    }
    CHECK(w.battery_type == reference);
    CHECK_THAT(w.plan.objective / scale, WithinRel(reference_obj, 1e-7));
  }
}
