#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "repread/error.hpp"

namespace {

int exit_code(repread::ErrorKind kind) {
  switch (kind) {
    case repread::ErrorKind::invalid_parameter:
    case repread::ErrorKind::validation:
      return 2;
    case repread::ErrorKind::convergence:
      return 3;
    case repread::ErrorKind::insufficient_statistics:
    case repread::ErrorKind::insufficient_jumps:
      return 4;
    default:
      return 1;
  }
}

}  // namespace

int main(int argc, char **argv) {
  using repread::cli::CommandOptions;
  using repread::cli::GlobalOptions;

  CLI::App app{"Repetitive nuclear-spin readout simulator and inference toolkit"};
  app.require_subcommand(1);
  GlobalOptions global;
  CommandOptions opts;
  app.add_option("--config", global.config_path, "Experiment configuration JSON")->required();
  app.add_option("--seed", global.seed, "RNG seed (overrides the config)");
  app.add_option("--out", global.out_dir, "Output directory (overrides the config)");
  app.add_option("--threads", global.threads, "Worker threads (fallback: REPREAD_THREADS, then 1)");

  auto *levels = app.add_subcommand("levels", "Diagonalize the spin Hamiltonian");
  levels->add_option("--state", opts.state, "ground or excited")->check(CLI::IsMember({"ground", "excited"}));

  auto *sim = app.add_subcommand("simulate-histogram", "Monte-Carlo photon-count histograms");
  sim->add_option("--initial", opts.initial, "bright, dark or both")->check(CLI::IsMember({"bright", "dark", "both"}));
  sim->add_option("--trials", opts.trials, "Trials per histogram");
  sim->add_option("-N,--repetitions", opts.n, "Repetitions per block");
  sim->add_option("--two-point", opts.two_point, "Record R2 after preparing this state with R1")
      ->check(CLI::IsMember({"bright", "dark"}));

  auto *fit = app.add_subcommand("fit-rates", "Maximum-likelihood switching and emission rates");
  fit->add_option("--hist", opts.histograms, "STATE:N:PATH histogram (repeatable)")->required();
  fit->add_option("--fix", opts.fix, "Hold a parameter at its config value")
      ->check(CLI::IsMember({"gamma_bright", "gamma_dark", "lambda_bright", "lambda_dark"}));

  app.add_subcommand("fidelity-scan", "Fidelity vs. success rate over N and threshold policies");
  app.add_subcommand("prep-fidelity", "Preparation fidelity by conditioning on a count window");

  auto *alt_sim = app.add_subcommand("alt-simulate", "Monte-Carlo histograms of the alternating readout");
  alt_sim->add_option("--initial", opts.initial, "up, down or both")->check(CLI::IsMember({"up", "down", "both"}));
  alt_sim->add_option("--trials", opts.trials, "Trials per histogram");
  alt_sim->add_option("--pairs", opts.n, "Pairs per block");

  app.add_subcommand("alt-fidelity-scan", "Fidelity scan for the alternating readout");

  app.add_subcommand("trajectory", "Simulate a binned quantum-jump trajectory");
  auto *filt = app.add_subcommand("filter-trajectory", "HMM filtering and smoothing of a trajectory CSV");
  filt->add_option("--input", opts.input, "Trajectory CSV")->required()->check(CLI::ExistingFile);
  auto *dwell = app.add_subcommand("dwell-rates", "Dwell-time rate estimates from a trajectory CSV");
  dwell->add_option("--input", opts.input, "Trajectory CSV")->required()->check(CLI::ExistingFile);

  app.add_subcommand("rabi", "Rabi nutation signal");
  auto *ramsey = app.add_subcommand("ramsey", "Ramsey signal with optional refit");
  ramsey->add_flag("--refit", opts.refit, "Refit detuning, beat splitting and T2*");
  ramsey->add_option("--input", opts.input, "Measured t_s,signal CSV to refit instead")->check(CLI::ExistingFile);

  app.add_subcommand("endor", "ENDOR spectrum of the configured bath");
  auto *match = app.add_subcommand("match-peaks", "Assign peaks to bath species");
  match->add_option("--input", opts.input, "Peak CSV (center_kHz,...); defaults to the configured bath")
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 2;
  }

  try {
    repread::cli::run_command(app.get_subcommands().front()->get_name(), global, opts);
  } catch (const repread::Error &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(e.kind());
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
