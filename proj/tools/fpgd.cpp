// fpgd: generate instances, run ProjFGD / FGD, sweep QST grids, verify lemma suites.

#include "projfgd/commands.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

using namespace projfgd;

int main(int argc, char** argv) {
  CLI::App app{"Projected factored gradient descent for low-rank PSD problems"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string suite;
  int jobs = 1;
  std::optional<std::uint64_t> seed;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", config_path, "run config JSON");
    if (needs_config) opt->required();
    sub->add_option("--out", out_dir, "output directory (default: config out_dir)");
    sub->add_option("--seed", seed, "override the config seed");
  };
  CLI::App* solve = app.add_subcommand("solve", "run the solver on one instance");
  add_common(solve, true);
  CLI::App* generate = app.add_subcommand("generate", "write an instance as ensemble + companion JSON");
  add_common(generate, true);
  CLI::App* sweep = app.add_subcommand("sweep", "QST grid over qubits x ranks x c_sam x seeds");
  add_common(sweep, true);
  sweep->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  CLI::App* verify = app.add_subcommand("verify", "run a diagnostic suite");
  add_common(verify, false);
  verify->add_option("--suite", suite, "projections|procrustes|gradients|tu|descent|contraction|xi|init");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  const Logger log;
  try {
    RunConfig rc;
    if (!config_path.empty()) rc = read_run_config(config_path);
    if (seed) rc.seed = *seed;
    const std::string out = out_dir.empty() ? rc.out_dir : out_dir;

    if (*solve) return cmd_solve(rc, out, log);
    if (*generate) return cmd_generate(rc, out, log);
    if (*sweep) return cmd_sweep(rc, out, jobs, log);
    if (*verify) {
      const std::string name = suite.empty() ? rc.suite : suite;
      if (name.empty()) throw ConfigError("verify needs --suite or a config with 'suite'");
      return cmd_verify(name, out, log);
    }
  } catch (const ConfigError& e) {
    log.error(e.what());
    return kExitUsage;
  } catch (const UnknownSuite& e) {
    log.error(e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    log.error(e.what());
    return kExitFailure;
  }
  return kExitUsage;
}
