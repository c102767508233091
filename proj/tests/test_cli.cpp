#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "catch_amalgamated.hpp"

#include "gridvest/cli.hpp"

using namespace gridvest;
namespace fs = std::filesystem;
using Catch::Matchers::ContainsSubstring;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "gridvest_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RunConfig small_config(const fs::path& out, int years = 2) {
  RunConfig c;
  c.years = years;
  c.output_dir = out.string();
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Everything after the first line.
std::string tail(const std::string& text) {
  const auto nl = text.find('\n');
  return nl == std::string::npos ? std::string() : text.substr(nl + 1);
}

const std::string kCatalogFile = std::string(GRIDVEST_SOURCE_DIR) + "/data/table1_catalog.csv";

}  // namespace

TEST_CASE("config parsing resolves paths and rejects unknown keys", "[config]") {
  const auto j = json::parse(R"({"seed": 4, "grid": {"years": 3, "day_mode": "full"},
      "catalog": {"path": "cat.csv"}, "battery": {"types": [2, 8], "curtailment": true},
      "igdt": {"betas": [0.05, 0.1], "mode": "robust", "coupling": "joint", "battery_type": 2},
      "output": {"dir": "out"}})");
  const auto c = parse_config(j, "/base");
  CHECK(c.seed == 4);
  CHECK(c.years == 3);
  CHECK(c.day_mode == DayMode::kFull);
  CHECK(c.catalog_path == "/base/cat.csv");
  CHECK(c.output_dir == "/base/out");
  CHECK(c.battery_types == std::vector<int>{2, 8});
  CHECK(c.curtailment);
  CHECK(c.igdt_grid.mode == igdt::Mode::kRobust);
  CHECK(c.igdt_grid.coupling == igdt::Coupling::kJoint);
  CHECK(c.igdt_battery_type == 2);
  CHECK_THROWS_WITH(parse_config(json::parse(R"({"grid": {"yeers": 3}})")), ContainsSubstring("grid.yeers"));
  CHECK_THROWS_AS(parse_config(json::parse(R"({"grid": {"years": "x"}})")), InputError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"scenario": {"price_unit": "EUR"}})")), InputError);
}

TEST_CASE("shipped configs load", "[config]") {
  for (const char* name : {"default.json", "igdt_y3.json"}) {
    const auto c = load_config(std::string(GRIDVEST_SOURCE_DIR) + "/configs/" + name);
    CHECK_NOTHROW(c.validate());
  }
}

TEST_CASE("validate prints a summary and exits 0", "[cli]") {
  auto cfg = small_config(fresh_dir("validate"));
  cfg.catalog_path = kCatalogFile;
  std::ostringstream os, err;
  CHECK(cli::cmd_validate(cfg, os, err) == cli::kExitOk);
  CHECK_THAT(os.str(), ContainsSubstring("2 years"));
  CHECK_THAT(os.str(), ContainsSubstring("ok"));
}

TEST_CASE("validate names the missing catalog year and exits 2", "[cli]") {
  const auto dir = fresh_dir("gap");
  std::ifstream in(kCatalogFile);
  std::string line, text;
  while (std::getline(in, line))
    if (line.rfind("2030,", 0) != 0) text += line + "\n";
  std::ofstream(dir / "cat.csv") << text;
  auto cfg = small_config(dir, 15);
  cfg.catalog_path = (dir / "cat.csv").string();
  std::ostringstream os, err;
  CHECK(cli::cmd_validate(cfg, os, err) == cli::kExitInput);
  CHECK_THAT(err.str(), ContainsSubstring("catalog gap at year 8"));
}

TEST_CASE("validate shows prices converted from $/MWh", "[cli]") {
  const auto dir = fresh_dir("mwh");
  const auto grid = TimeGrid::representative(1);
  auto data = synth_scenario(1, grid);
  for (auto& p : data.utility_price) p = 150.0;
  data.utility_price[grid.index({1, 1, 1, 1})] = 90.0;
  data.utility_price[grid.index({1, 3, 1, 19})] = 410.0;
  write_scenario(data, (dir / "scenario.csv").string());
  auto cfg = small_config(dir, 1);
  cfg.scenario_path = (dir / "scenario.csv").string();
  cfg.price_unit = PriceUnit::kPerMwh;
  std::ostringstream os, err;
  REQUIRE(cli::cmd_validate(cfg, os, err) == cli::kExitOk);
  CHECK_THAT(os.str(), ContainsSubstring("min 0.0900"));
  CHECK_THAT(os.str(), ContainsSubstring("max 0.4100"));
}

TEST_CASE("plan writes every report and check re-verifies them", "[cli]") {
  const auto dir = fresh_dir("plan");
  auto cfg = small_config(dir);
  std::ostringstream os, err;
  REQUIRE(cli::cmd_plan(cfg, os, err) == cli::kExitOk);
  for (const char* f : {"plan_summary.json", "table1_capacity_kwh.csv", "table2_capex_kusd.csv",
                        "table3_opex_no_battery_kusd.csv", "table4_opex_with_battery_kusd.csv",
                        "table5_total_cost.csv", "cashflow_details.csv", "dispatch_no_battery.csv",
                        "dispatch_type1.csv", "dispatch_type8.csv", "cashflow_type4.csv"})
    CHECK(fs::exists(dir / f));
  CHECK_THAT(os.str(), ContainsSubstring("<- winner"));

  const auto summary = json::parse(slurp(dir / "plan_summary.json"));
  CHECK(summary.at("summary").size() == 5);
  int winners = 0;
  for (const auto& row : summary.at("summary")) winners += row.value("winner", false);
  CHECK(winners == 1);

  const auto dispatch = slurp(dir / "dispatch_type4.csv");
  CHECK(dispatch.rfind("# generated ", 0) == 0);
  CHECK_THAT(dispatch, ContainsSubstring("seed=1"));
  CHECK_THAT(tail(dispatch), ContainsSubstring("y,q,d,t,p_pv,p_utility,p_ch,p_dis,soc,curtail"));
  CHECK_THAT(slurp(dir / "cashflow_type4.csv"), ContainsSubstring("year,opex,capex_line"));

  std::ostringstream cos, cerr;
  CHECK(cli::cmd_check(cfg, cos, cerr) == cli::kExitOk);
  CHECK_THAT(cos.str(), ContainsSubstring("4/4 checks passed"));
}

TEST_CASE("check rejects a tampered objective", "[cli]") {
  const auto dir = fresh_dir("tamper");
  auto cfg = small_config(dir, 1);
  cfg.battery_types = {2};
  std::ostringstream os, err;
  REQUIRE(cli::cmd_plan(cfg, os, err) == cli::kExitOk);
  auto summary = json::parse(slurp(dir / "plan_summary.json"));
  for (auto& p : summary["plans"]) p["objective"] = p["objective"].get<double>() * 1.01;
  std::ofstream(dir / "plan_summary.json") << summary.dump(2);
  std::ostringstream cos, cerr;
  CHECK(cli::cmd_check(cfg, cos, cerr) == cli::kExitSolve);
  CHECK_THAT(cos.str(), ContainsSubstring("FAILED"));
}

TEST_CASE("an empty type list gives a baseline-only report", "[cli]") {
  const auto dir = fresh_dir("baseline_only");
  auto cfg = small_config(dir, 1);
  cfg.battery_types = {};
  std::ostringstream os, err;
  REQUIRE(cli::cmd_plan(cfg, os, err) == cli::kExitOk);
  const auto summary = json::parse(slurp(dir / "plan_summary.json"));
  CHECK(summary.at("summary").size() == 1);
  CHECK(summary.at("plans").empty());
  CHECK(fs::exists(dir / "dispatch_no_battery.csv"));
}

TEST_CASE("exit 1 when every type fails to solve", "[cli]") {
  const auto dir = fresh_dir("all_fail");
  auto cfg = small_config(dir, 1);
  cfg.pv.rating = 5000.0;       // midday surplus far beyond any charge limit
  cfg.capacity_year_cap = 1.0;  // kWh
  std::ostringstream os, err;
  CHECK(cli::cmd_plan(cfg, os, err) == cli::kExitSolve);
  CHECK_THAT(err.str(), ContainsSubstring("surplus"));
}

TEST_CASE("input failures exit 2", "[cli]") {
  auto cfg = small_config(fresh_dir("bad_input"));
  cfg.scenario_path = "/nonexistent/scenario.csv";
  std::ostringstream os, err;
  CHECK(cli::cmd_plan(cfg, os, err) == cli::kExitInput);
  cfg = small_config(fresh_dir("bad_input"));
  cfg.battery_types = {3};
  CHECK(cli::cmd_validate(cfg, os, err) == cli::kExitInput);
}

TEST_CASE("igdt with beta zero writes all-zero radii", "[cli]") {
  const auto dir = fresh_dir("igdt_zero");
  auto cfg = small_config(dir, 1);
  cfg.curtailment = true;
  cfg.igdt_grid.betas = {0.0};
  cfg.igdt_battery_type = 4;
  std::ostringstream os, err;
  REQUIRE(cli::cmd_igdt(cfg, os, err) == cli::kExitOk);
  const auto rows = report::read_igdt_csv((dir / "igdt_curve.csv").string());
  REQUIRE(rows.size() == 4);
  for (const auto& r : rows) CHECK(r.alpha == 0.0);
  CHECK(fs::exists(dir / "igdt_curve.json"));
  CHECK(fs::exists(dir / "igdt_log.txt"));
}

TEST_CASE("igdt robust mode writes two rows per beta and passes the checker", "[cli]") {
  const auto dir = fresh_dir("igdt_robust");
  auto cfg = small_config(dir, 1);
  cfg.curtailment = true;
  cfg.igdt_grid.betas = {0.05, 0.1};
  cfg.igdt_grid.mode = igdt::Mode::kRobust;
  cfg.battery_types = {1, 4};
  std::ostringstream os, err;
  REQUIRE(cli::cmd_igdt(cfg, os, err) == cli::kExitOk);
  CHECK_THAT(os.str(), ContainsSubstring("using the cheapest type"));
  const auto text = slurp(dir / "igdt_curve.csv");
  CHECK_THAT(tail(text), ContainsSubstring("beta,param,mode,alpha,achieved_cost,iterations,flags"));
  CHECK(report::read_igdt_csv((dir / "igdt_curve.csv").string()).size() == 4);
  std::ostringstream cos, cerr;
  CHECK(cli::cmd_check(cfg, cos, cerr, false, true) == cli::kExitOk);
  CHECK_THAT(cos.str(), ContainsSubstring("4/4 checks passed"));
}

TEST_CASE("igdt warns when curtailment is off", "[cli]") {
  auto cfg = small_config(fresh_dir("igdt_warn"), 1);
  cfg.igdt_grid.betas = {0.0};
  cfg.igdt_battery_type = 2;
  std::ostringstream os, err;
  CHECK(cli::cmd_igdt(cfg, os, err) == cli::kExitOk);
  CHECK_THAT(err.str(), ContainsSubstring("curtailment is off"));
}

TEST_CASE("re-running plan reproduces every report byte for byte after the stamp", "[cli]") {
  const auto a = fresh_dir("repeat_a"), b = fresh_dir("repeat_b");
  std::ostringstream os, err;
  REQUIRE(cli::cmd_plan(small_config(a), os, err) == cli::kExitOk);
  REQUIRE(cli::cmd_plan(small_config(b), os, err) == cli::kExitOk);
  int files = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    const auto name = entry.path().filename();
    REQUIRE(fs::exists(b / name));
    const auto ta = slurp(a / name), tb = slurp(b / name);
    if (name.extension() == ".csv") CHECK(tail(ta) == tail(tb));
    else CHECK(ta == tb);
    ++files;
  }
  CHECK(files >= 15);
}

TEST_CASE("synth writes a loadable scenario and catalog", "[cli]") {
  const auto dir = fresh_dir("synth");
  auto cfg = small_config(dir, 2);
  cfg.seed = 8;
  std::ostringstream os, err;
  REQUIRE(cli::cmd_synth(cfg, os, err) == cli::kExitOk);
  const auto loaded = load_scenario((dir / "scenario.csv").string(), TimeGrid::representative(2));
  CHECK(loaded.irradiance == synth_scenario(8, TimeGrid::representative(2)).irradiance);
  CHECK(load_catalog((dir / "catalog.csv").string(), 15).cost(15, 8) == 282.0);
}

TEST_CASE("the executable honours the exit-code contract", "[cli][binary]") {
  const std::string exe = GRIDVEST_CLI_PATH;
  const auto dir = fresh_dir("binary");
  std::ofstream(dir / "cfg.json") << R"({"grid": {"years": 1}, "output": {"dir": "out"}})";
  std::ofstream(dir / "bad.json") << R"({"grid": {"years": 1, "colour": 1}})";
  auto run = [&](const std::string& args) {
    const int status = std::system((exe + " " + args + " > " + (dir / "log.txt").string() + " 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  CHECK(run("--config " + (dir / "cfg.json").string() + " validate") == 0);
  CHECK(run("--config " + (dir / "bad.json").string() + " validate") == 2);
  CHECK(run("--config " + (dir / "cfg.json").string() + " --seed 3 --curtailment --out " + (dir / "o2").string() +
            " synth") == 0);
  CHECK(fs::exists(dir / "o2" / "scenario.csv"));
  CHECK_THAT(slurp(dir / "o2" / "scenario.csv"), ContainsSubstring("seed=3"));
  CHECK(run("--config " + (dir / "cfg.json").string() + " --rep-day --full validate") != 0);
}
