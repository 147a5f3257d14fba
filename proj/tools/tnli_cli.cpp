// tnli: noise budgets, variance checks, parameter sweeps, spectra and figure
// reproduction for truncated-nonlinear-interferometer AFM readout.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tnli/commands.hpp"

namespace {

void add_common(CLI::App* cmd, tnli::cli::CommonOptions& opts) {
  cmd->add_option("config", opts.config, "Config file, run manifest, or 'paper_default'")
      ->capture_default_str();
  cmd->add_option("--set", opts.overrides, "Override a config field: key=value (repeatable)");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace tnli::cli;
  CLI::App app{"Truncated nonlinear interferometry AFM readout simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(TNLI_VERSION_STRING));

  BudgetOptions budget;
  std::string budget_topology;
  auto* budget_cmd = app.add_subcommand("budget", "Shot-noise, backaction, SQL and squeezed floors");
  add_common(budget_cmd, budget);
  budget_cmd->add_option("--topology", budget_topology, "probe | lo (default: both)")
      ->check(CLI::IsMember({"probe", "lo"}));
  budget_cmd->add_option("--json", budget.json_path, "Also write the report as JSON");
  budget_cmd->add_flag("--print-json", budget.json_stdout, "Print JSON instead of the table");

  VarianceOptions variance;
  auto* variance_cmd = app.add_subcommand("variance", "Analytic vs covariance-engine noise variance");
  add_common(variance_cmd, variance);
  variance_cmd->add_flag("--print-json", variance.json_stdout, "Print JSON");

  SweepOptions sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Sweep one config field and emit CSV");
  add_common(sweep_cmd, sweep);
  sweep_cmd->add_option("--param", sweep.param, "Field name, e.g. interferometer.eta")->required();
  sweep_cmd->add_option("--from", sweep.from, "Start value (unit suffix optional, SI if bare)")->required();
  sweep_cmd->add_option("--to", sweep.to, "End value")->required();
  sweep_cmd->add_option("--steps", sweep.steps, "Number of points (>= 2)")->required();
  sweep_cmd->add_flag("--log", sweep.log, "Geometric spacing");
  sweep_cmd->add_option("--jobs", sweep.jobs, "Worker threads")->capture_default_str();
  sweep_cmd->add_option("--out", sweep.out_path, "CSV path (default stdout)");

  SpectrumOptions spectrum;
  std::uint64_t spectrum_seed = 0;
  auto* spectrum_cmd = app.add_subcommand("spectrum", "Synthesise one analyzer trace");
  add_common(spectrum_cmd, spectrum);
  auto* spectrum_seed_opt = spectrum_cmd->add_option("--seed", spectrum_seed, "RNG seed");
  spectrum_cmd->add_option("--out", spectrum.out_prefix, "Output prefix (<prefix>.csv/.json)")
      ->capture_default_str();
  spectrum_cmd->add_option("--jobs", spectrum.jobs, "Worker threads")->capture_default_str();

  ReproduceOptions reproduce;
  std::string figure;
  std::uint64_t reproduce_seed = 0;
  auto* reproduce_cmd = app.add_subcommand("reproduce", "Regenerate the drive-level trace sets");
  reproduce_cmd->add_option("figure", figure, "fig2 (probe on cantilever) | fig3 (LO on cantilever)")
      ->required()
      ->check(CLI::IsMember({"fig2", "fig3"}));
  reproduce_cmd->add_option("--config", reproduce.config, "Config, manifest or 'paper_default'")
      ->capture_default_str();
  reproduce_cmd->add_option("--set", reproduce.overrides, "Override a config field: key=value");
  auto* reproduce_seed_opt = reproduce_cmd->add_option("--seed", reproduce_seed, "RNG seed");
  reproduce_cmd->add_option("--out", reproduce.out_dir, "Output directory")->capture_default_str();
  reproduce_cmd->add_option("--jobs", reproduce.jobs, "Worker threads")->capture_default_str();
  reproduce_cmd->add_option("--timestamp", reproduce.timestamp, "Manifest timestamp (ISO-8601)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidationError;
  }

  if (*budget_cmd) {
    if (!budget_topology.empty()) budget.topology = tnli::model::parse_topology(budget_topology);
    return cmd_budget(budget, std::cout, std::cerr);
  }
  if (*variance_cmd) return cmd_variance(variance, std::cout, std::cerr);
  if (*sweep_cmd) return cmd_sweep(sweep, std::cout, std::cerr);
  if (*spectrum_cmd) {
    if (*spectrum_seed_opt) spectrum.seed = spectrum_seed;
    return cmd_spectrum(spectrum, std::cout, std::cerr);
  }
  if (*reproduce_cmd) {
    reproduce.figure = parse_figure(figure);
    if (*reproduce_seed_opt) reproduce.seed = reproduce_seed;
    return cmd_reproduce(reproduce, std::cout, std::cerr);
  }
  return kValidationError;
}
