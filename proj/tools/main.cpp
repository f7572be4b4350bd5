#include <iostream>

#include <CLI11.hpp>

#include "cli/commands.hpp"
#include "ordlatent/version.hpp"

using namespace ordlatent::cli;

namespace {

void add_panel_flags(CLI::App* cmd, ordlatent::cli::PanelOptions& panel) {
  cmd->add_option("--px", panel.p_x, "Number of X-block columns (when the header has no X:/Y: prefixes)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--py", panel.p_y, "Number of Y-block columns")->check(CLI::PositiveNumber);
  cmd->add_option("--q", panel.q, "Number of categories (default: largest code in the file)")
      ->check(CLI::Range(2, 1000));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent correlation between two blocks of ordinal variables"};
  app.set_version_flag("--version", std::string(ordlatent::kVersion));
  app.require_subcommand(1);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit the model to a panel CSV and write a JSON report");
  fit_cmd->add_option("input", fit.input, "Panel CSV")->required();
  add_panel_flags(fit_cmd, fit.panel);
  fit_cmd->add_flag("--per-variable-thresholds", "Separate thresholds for every variable")
      ->each([&](const std::string&) { fit.panel.shared_thresholds = false; });
  fit_cmd->add_option("--seed", fit.seed, "Seed for starts and bootstrap draws");
  fit_cmd->add_option("--bootstrap", fit.bootstrap, "Parametric bootstrap replicates (0 = none)")
      ->check(CLI::NonNegativeNumber);
  fit_cmd->add_option("--threads", fit.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  fit_cmd->add_option("--scores-out", fit.scores_out, "Write latent scores as CSV");
  fit_cmd->add_flag("--no-fisher-correction", "Omit the rho/(2(n-1)) shift in the Fisher interval")
      ->each([&](const std::string&) { fit.fisher_mean_correction = false; });
  fit_cmd->add_option("-o,--output", fit.output, "Report path (default stdout)");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Sample a panel from a built-in scenario");
  sim_cmd->add_option("--scenario", sim.scenario, "S1 or S2");
  sim_cmd->add_option("--rho", sim.rho, "Latent correlation");
  sim_cmd->add_option("--n", sim.n, "Rows to sample");
  sim_cmd->add_option("--seed", sim.seed, "Seed");
  sim_cmd->add_option("-o,--output", sim.output, "Panel path (default stdout)");

  McArgs mc;
  auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo study of a built-in scenario");
  mc_cmd->add_option("--scenario", mc.scenario, "S1 or S2");
  mc_cmd->add_option("--rho", mc.rho, "Latent correlation");
  mc_cmd->add_option("--n", mc.n, "Rows per replicate");
  mc_cmd->add_option("--reps", mc.reps, "Replicates");
  mc_cmd->add_option("--seed", mc.seed, "Seed");
  mc_cmd->add_option("--threads", mc.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  mc_cmd->add_option("-o,--out-dir", mc.out_dir,
                     "Directory for replicates.csv, coverage.csv, boxplot.csv and summary.json (default: summary to stdout)");

  BaselinesArgs base;
  auto* base_cmd = app.add_subcommand("baselines", "Pairwise polychoric and canonical correlations");
  base_cmd->add_option("input", base.input, "Panel CSV, or contingency table CSV with --table")->required();
  add_panel_flags(base_cmd, base.panel);
  base_cmd->add_flag("--table", base.table, "Input is a single contingency table");
  base_cmd->add_option("-o,--output", base.output, "Report path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*fit_cmd) cmd_fit(fit, std::cout);
    if (*sim_cmd) cmd_simulate(sim, std::cout);
    if (*mc_cmd) cmd_mc(mc, std::cout);
    if (*base_cmd) cmd_baselines(base, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "ordlatent: " << e.what() << '\n';
    return exit_code_for(e);
  }
  std::cout.flush();
  return std::cout ? kExitOk : kExitIo;
}
