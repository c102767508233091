#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "gridvest/cli.hpp"

int main(int argc, char** argv) {
  using namespace gridvest;
  CLI::App app{"Community battery investment planning under PV and EV uncertainty"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  bool rep_day = false, full = false, curtailment = false;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  app.add_option("--seed", seed, "seed for synthetic data (overrides seed)");
  auto* rep_opt = app.add_flag("--rep-day", rep_day, "one representative day per quarter");
  app.add_flag("--full", full, "every calendar day")->excludes(rep_opt);
  app.add_flag("--curtailment", curtailment, "allow penalty-free PV curtailment");

  auto* validate = app.add_subcommand("validate", "load and summarize inputs without solving");
  auto* plan = app.add_subcommand("plan", "deterministic plan for every battery type plus reports");
  auto* igdt_cmd = app.add_subcommand("igdt", "robustness / opportunity radius sweep");
  auto* synth = app.add_subcommand("synth", "write the synthetic scenario and built-in catalog as CSV");
  auto* check = app.add_subcommand("check", "re-verify plan and IGDT outputs in the output directory");
  bool plans_only = false, igdt_only = false;
  auto* po = check->add_flag("--plans-only", plans_only, "skip the IGDT band check");
  check->add_flag("--igdt-only", igdt_only, "skip plan verification")->excludes(po);

  CLI11_PARSE(app, argc, argv);

  RunConfig cfg;
  const int loaded = cli::guarded(std::cerr, [&] {
    if (!config_path.empty()) cfg = load_config(config_path);
    return cli::kExitOk;
  });
  if (loaded != cli::kExitOk) return loaded;
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  if (seed) cfg.seed = *seed;
  if (rep_day) cfg.day_mode = DayMode::kRepresentative;
  if (full) cfg.day_mode = DayMode::kFull;
  if (curtailment) cfg.curtailment = true;

  if (*validate) return cli::cmd_validate(cfg, std::cout, std::cerr);
  if (*plan) return cli::cmd_plan(cfg, std::cout, std::cerr);
  if (*igdt_cmd) return cli::cmd_igdt(cfg, std::cout, std::cerr);
  if (*synth) return cli::cmd_synth(cfg, std::cout, std::cerr);
  if (*check) return cli::cmd_check(cfg, std::cout, std::cerr, !igdt_only, !plans_only);
  return cli::kExitInput;
}
