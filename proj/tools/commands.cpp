#include "commands.hpp"

#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>

#include <json.hpp>

#include "repread/alt_readout.hpp"
#include "repread/config.hpp"
#include "repread/csv_io.hpp"
#include "repread/dynamics.hpp"
#include "repread/endor.hpp"
#include "repread/error.hpp"
#include "repread/fidelity.hpp"
#include "repread/hashing.hpp"
#include "repread/manifest.hpp"
#include "repread/rate_fit.hpp"
#include "repread/readout.hpp"
#include "repread/spin_model.hpp"
#include "repread/trajectory.hpp"

namespace repread::cli {

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

struct Run {
  ExperimentConfig cfg;
  std::string out_dir;
  ChunkPlan plan;
  RunManifest manifest;
  std::vector<std::string> outputs;
  ojson summary = ojson::object();

  std::string output(const std::string &name) {
    outputs.push_back(name);
    return (fs::path(out_dir) / name).string();
  }
};

ojson point_json(const FidelityPoint &p, double crc_pass) {
  return {{"N", p.repetitions},
          {"n_dark_max", p.policy.dark_max},
          {"n_bright_min", p.policy.bright_min},
          {"F_dark", p.f_dark},
          {"F_bright", p.f_bright},
          {"F_avg", p.f_avg},
          {"eta", p.eta},
          {"eta_with_crc", p.eta * crc_pass}};
}

// Best F_avg among points with eta inside [lo, hi], if any.
const FidelityPoint *best_in_window(const std::vector<FidelityPoint> &points, double lo, double hi) {
  const FidelityPoint *best = nullptr;
  for (const FidelityPoint &p : points)
    if (p.eta >= lo && p.eta <= hi && (!best || p.f_avg > best->f_avg)) best = &p;
  return best;
}

std::vector<HiddenState> initial_states(const std::string &which) {
  if (which == "both") return {HiddenState::bright, HiddenState::dark};
  return {parse_hidden_state(which)};
}

void cmd_levels(Run &run, const CommandOptions &opts) {
  if (!run.cfg.spin_system) throw ValidationError("spin_system", "required for 'levels'");
  const SpinSystem &sys = *run.cfg.spin_system;
  const ElectronicState state = opts.state == "excited" ? ElectronicState::excited : ElectronicState::ground;
  const EnergyLevels levels = eigen_levels(build_hamiltonian(sys, state));
  write_levels(run.output("levels.csv"), levels);
  run.summary["state"] = opts.state;
  run.summary["high_field_labels"] = levels.high_field_labels();
  if (levels.high_field_labels()) {
    ojson nuclear = ojson::object();
    for (ElectronProjection ms : {ElectronProjection::plus_3_2, ElectronProjection::plus_1_2,
                                  ElectronProjection::minus_1_2, ElectronProjection::minus_3_2})
      nuclear[to_string(ms)] = nuclear_transition_frequency(levels, ms);
    run.summary["nuclear_transition_MHz"] = nuclear;
  }
}

void cmd_simulate_histogram(Run &run, const CommandOptions &opts) {
  const ReadoutBlock &rb = run.cfg.readout;
  const ReadoutParams params = rb.params.with_repetitions(opts.n.value_or(rb.params.repetitions));
  const std::uint64_t trials = opts.trials.value_or(rb.trials);
  if (opts.two_point) {
    TwoPointSpec spec;
    spec.n1 = run.cfg.readout.prep_n;
    spec.n2 = params.repetitions;
    spec.prepare = parse_hidden_state(*opts.two_point);
    spec.bright_threshold = rb.bright_threshold;
    spec.crc_pass = rb.crc_pass;
    const TwoPointResult r = two_point_histogram(params, spec, trials, run.plan);
    write_histogram(run.output("two_point_" + to_string(spec.prepare) + ".csv"), r.r2, "n");
    run.summary["attempted"] = r.attempted;
    run.summary["accepted"] = r.accepted;
    run.summary["acceptance"] = r.acceptance();
    return;
  }
  for (HiddenState s : initial_states(opts.initial)) {
    const Histogram h = simulate_counts(params, s, trials, run.plan);
    write_histogram(run.output("histogram_" + to_string(s) + ".csv"), h, "n");
    write_pmf(run.output("pmf_" + to_string(s) + ".csv"), count_distribution(params, s).marginal, "n");
    run.summary["mean_" + to_string(s)] = h.mean();
  }
  run.summary["N"] = params.repetitions;
  run.summary["trials"] = trials;
}

void cmd_fit_rates(Run &run, const CommandOptions &opts) {
  std::vector<ObservedHistogram> data;
  for (const std::string &spec : opts.histograms) {
    const auto a = spec.find(':'), b = spec.find(':', a == std::string::npos ? a : a + 1);
    if (a == std::string::npos || b == std::string::npos)
      throw ValidationError("--hist", "expected STATE:N:PATH, got '" + spec + "'");
    ObservedHistogram obs;
    obs.initial = parse_hidden_state(spec.substr(0, a));
    try {
      obs.repetitions = std::stol(spec.substr(a + 1, b - a - 1));
    } catch (const std::exception &) {
      throw ValidationError("--hist", "bad N in '" + spec + "'");
    }
    obs.histogram = read_histogram(spec.substr(b + 1));
    data.push_back(std::move(obs));
  }
  FitMask mask;
  const std::map<std::string, FitParameter> names{{"gamma_bright", FitParameter::gamma_bright},
                                                  {"gamma_dark", FitParameter::gamma_dark},
                                                  {"lambda_bright", FitParameter::lambda_bright},
                                                  {"lambda_dark", FitParameter::lambda_dark}};
  for (const std::string &f : opts.fix) mask.fix(names.at(f));

  auto report = [&](const RateFit &fit) {
    const ReadoutParams &e = fit.estimate;
    const std::array<double, 4> values{e.gamma_bright_hz, e.gamma_dark_hz, e.lambda_bright, e.lambda_dark};
    const std::array<const char *, 4> keys{"gamma_bright_Hz", "gamma_dark_Hz", "lambda_bright_per_rep",
                                           "lambda_dark_per_rep"};
    FILE *f = std::fopen(run.output("fit.csv").c_str(), "w");
    if (!f) throw IoError("cannot write fit.csv");
    std::fprintf(f, "parameter,estimate,half_width\n");
    for (std::size_t i = 0; i < 4; ++i) {
      std::fprintf(f, "%s,%.12g,%.12g\n", keys[i], values[i], fit.half_width[i]);
      run.summary[keys[i]] = values[i];
    }
    std::fclose(f);
    run.summary["log_likelihood"] = fit.log_likelihood;
    run.summary["converged"] = fit.converged;
    run.summary["evaluations"] = fit.evaluations;
  };
  try {
    report(fit_rates(data, run.cfg.readout.params, mask));
  } catch (const ConvergenceError &e) {
    report(e.best_so_far());
    throw;
  }
}

void cmd_fidelity_scan(Run &run, const CommandOptions &) {
  const ReadoutBlock &rb = run.cfg.readout;
  PolicyGrid grid;
  grid.dark_max_hi = rb.dark_max_hi;
  grid.bright_min_hi = rb.bright_min_hi;
  const FidelityScan scan = fidelity_scan(rb.params, rb.n_list, grid);
  write_fidelity_points(run.output("fidelity_scan.csv"), scan.points);
  write_fidelity_points(run.output("pareto.csv"), scan.pareto);

  const ThresholdPolicy single{rb.bright_threshold - 1, rb.bright_threshold};
  const FidelityPoint fp = readout_fidelity(rb.params, single);
  run.summary["crc_pass"] = rb.crc_pass;
  run.summary["single_threshold"] = point_json(fp, rb.crc_pass);
  if (const FidelityPoint *p = best_in_window(scan.pareto, 0.05, 0.20))
    run.summary["best_eta_0.05_0.20"] = point_json(*p, rb.crc_pass);
}

void cmd_prep_fidelity(Run &run, const CommandOptions &) {
  const ReadoutBlock &rb = run.cfg.readout;
  const CountCondition cond{rb.prep_n_min, rb.prep_n_max};
  const PreparationResult r = preparation_fidelity(rb.params.with_repetitions(rb.prep_n), cond);
  FILE *f = std::fopen(run.output("prep_fidelity.csv").c_str(), "w");
  if (!f) throw IoError("cannot write prep_fidelity.csv");
  std::fprintf(f, "N,n_min,n_max,P_dark,P_bright,P_condition\n%ld,%ld,%ld,%.12g,%.12g,%.12g\n", rb.prep_n,
               cond.n_min, cond.n_max, r.p_dark, r.p_bright, r.p_condition);
  std::fclose(f);
  run.summary["P_dark"] = r.p_dark;
  run.summary["P_bright"] = r.p_bright;
  run.summary["P_condition"] = r.p_condition;
  run.summary["P_condition_with_crc"] = r.p_condition * rb.crc_pass;
}

void cmd_alt_simulate(Run &run, const CommandOptions &opts) {
  const AltReadoutParams params{run.cfg.readout.params, opts.n.value_or(run.cfg.alt.n_pairs)};
  const std::uint64_t trials = opts.trials.value_or(run.cfg.alt.trials);
  for (HiddenState s : initial_states(opts.initial)) {
    const std::string name = s == HiddenState::bright ? "up" : "down";
    const Histogram h = simulate_alt(params, s, trials, run.plan);
    write_histogram(run.output("alt_histogram_" + name + ".csv"), h, "k");
    write_pmf(run.output("alt_pmf_" + name + ".csv"), diff_distribution(params, s).marginal, "k");
    run.summary["mean_" + name] = h.mean();
  }
  run.summary["N_pairs"] = params.n_pairs;
  run.summary["trials"] = trials;
}

void cmd_alt_fidelity_scan(Run &run, const CommandOptions &) {
  const AltReadoutParams params{run.cfg.readout.params, run.cfg.alt.n_pairs};
  const FidelityScan scan = alt_fidelity_scan(params, run.cfg.alt.n_pairs_list, alt_policy_grid(run.cfg.alt.k_hi));
  write_fidelity_points(run.output("alt_fidelity_scan.csv"), scan.points);
  write_fidelity_points(run.output("alt_pareto.csv"), scan.pareto);
  if (const FidelityPoint *p = best_in_window(scan.pareto, 0.05, 0.10))
    run.summary["best_eta_0.05_0.10"] = point_json(*p, run.cfg.readout.crc_pass);
}

void cmd_trajectory(Run &run, const CommandOptions &) {
  const TrajectoryBlock &tb = run.cfg.trajectory;
  const Trajectory traj = simulate_trajectory(run.cfg.readout.params, tb.t_total_s, tb.n_bin, run.plan.seed);
  write_trajectory(run.output("trajectory.csv"), traj);
  run.summary["bins"] = traj.size();
  run.summary["bin_duration_s"] = traj.bin_duration_s;
  run.summary["jumps"] = traj.jump_times_s.size();
}

Trajectory load_trajectory(const Run &run, const std::string &path) {
  const long n_bin = run.cfg.trajectory.n_bin;
  return read_trajectory(path, run.cfg.readout.params.t_rep_s * static_cast<double>(n_bin), n_bin);
}

double path_error(const std::vector<HiddenState> &path, const std::vector<HiddenState> &truth) {
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < path.size(); ++i) wrong += path[i] != truth[i];
  return static_cast<double>(wrong) / static_cast<double>(path.size());
}

void cmd_filter_trajectory(Run &run, const CommandOptions &opts) {
  const Trajectory traj = load_trajectory(run, opts.input);
  const FilterResult fr = hmm_smooth(traj, run.cfg.readout.params);
  write_filter_result(run.output("filter.csv"), fr);
  run.summary["log_evidence"] = fr.log_evidence;
  if (traj.true_states) {
    FilterResult filtered_only = fr;
    filtered_only.smoothed.clear();
    run.summary["error_rate_smoothed"] = path_error(assign_states(fr, run.cfg.trajectory.p_threshold), *traj.true_states);
    run.summary["error_rate_filtered"] =
        path_error(assign_states(filtered_only, run.cfg.trajectory.p_threshold), *traj.true_states);
  }
}

void cmd_dwell_rates(Run &run, const CommandOptions &opts) {
  const Trajectory traj = load_trajectory(run, opts.input);
  const FilterResult fr = hmm_smooth(traj, run.cfg.readout.params);
  const DwellStats st = dwell_time_rates(assign_states(fr, run.cfg.trajectory.p_threshold), traj.bin_duration_s);
  FILE *f = std::fopen(run.output("dwell_rates.csv").c_str(), "w");
  if (!f) throw IoError("cannot write dwell_rates.csv");
  std::fprintf(f, "state,mean_dwell_s,dwell_count,rate_Hz,rate_se_Hz\n");
  for (HiddenState s : {HiddenState::bright, HiddenState::dark}) {
    const auto k = idx(s);
    std::fprintf(f, "%s,%.12g,%ld,%.12g,%.12g\n", to_string(s).c_str(), st.mean_dwell_s[k], st.dwell_count[k],
                 st.rate_hz[k], st.rate_se_hz[k]);
    run.summary["rate_" + to_string(s) + "_Hz"] = st.rate_hz[k];
  }
  std::fclose(f);
  run.summary["jumps"] = st.jumps;
}

std::vector<double> maybe_sample(const Run &run, const std::vector<double> &signal) {
  const long shots = run.cfg.dynamics.shots;
  return shots > 0 ? sample_signal(signal, shots, run.plan.seed) : signal;
}

void cmd_rabi(Run &run, const CommandOptions &) {
  const DynamicsBlock &d = run.cfg.dynamics;
  RabiConfig cfg{d.rabi_frequency_khz, d.durations.values(), d.contrast};
  write_series(run.output("rabi.csv"), "t_s", "signal", cfg.durations_s, maybe_sample(run, rabi_signal(cfg)));
  run.summary["dark_endpoint"] = cfg.contrast.dark_endpoint();
  run.summary["bright_endpoint"] = cfg.contrast.bright_endpoint();
}

void cmd_ramsey(Run &run, const CommandOptions &opts) {
  const DynamicsBlock &d = run.cfg.dynamics;
  RamseyConfig cfg{d.detuning_khz, d.t2_star_s, d.decay_exponent, d.beat_splitting_khz, d.durations.values(),
                   d.contrast};
  std::vector<double> t = cfg.durations_s, y;
  if (!opts.input.empty()) {
    std::tie(t, y) = read_series(opts.input, "t_s", "signal");
  } else {
    y = maybe_sample(run, ramsey_signal(cfg));
    write_series(run.output("ramsey.csv"), "t_s", "signal", t, y);
  }
  if (opts.refit || !opts.input.empty()) {
    const RamseyFit fit = fit_ramsey(t, y, cfg);
    run.summary["detuning_kHz"] = fit.detuning_khz;
    run.summary["beat_splitting_kHz"] = fit.beat_splitting_khz;
    run.summary["T2_star_s"] = fit.t2_star_s;
    run.summary["residual_ss"] = fit.residual_ss;
    run.summary["converged"] = fit.converged;
  }
}

Spectrum configured_spectrum(const Run &run) {
  const DynamicsBlock &d = run.cfg.dynamics;
  if (!run.cfg.spin_system) throw ValidationError("spin_system.B_T", "required for ENDOR");
  EndorOptions eo;
  eo.baseline = d.endor_baseline;
  eo.gyromagnetic = run.cfg.gyromagnetic;
  eo.min_prominence = d.endor_min_prominence;
  return endor_spectrum(d.bath, run.cfg.spin_system->b_z,
                        linear_grid(d.endor_f_lo_khz, d.endor_f_hi_khz, static_cast<std::size_t>(d.endor_points)),
                        eo);
}

void cmd_endor(Run &run, const CommandOptions &) {
  const Spectrum sp = configured_spectrum(run);
  write_spectrum(run.output("endor_spectrum.csv"), sp);
  write_peaks(run.output("endor_peaks.csv"), sp.peaks);
  run.summary["peaks"] = sp.peaks.size();
}

void cmd_match_peaks(Run &run, const CommandOptions &opts) {
  std::vector<double> centers;
  if (opts.input.empty()) {
    for (const Peak &p : configured_spectrum(run).peaks) centers.push_back(p.center_khz);
  } else {
    centers = read_peak_centers(opts.input);
  }
  if (!run.cfg.spin_system) throw ValidationError("spin_system.B_T", "required for peak matching");
  MatchOptions mo;
  mo.tolerance_khz = run.cfg.dynamics.match_tolerance_khz;
  mo.single_window_khz = run.cfg.dynamics.match_single_window_khz;
  mo.gyromagnetic = run.cfg.gyromagnetic;
  const auto assignments = match_peaks(centers, run.cfg.spin_system->b_z, mo);
  write_assignments(run.output("assignments.csv"), assignments);
  long pairs = 0;
  for (const auto &a : assignments) pairs += a.peaks_khz.size() == 2;
  run.summary["peaks"] = centers.size();
  run.summary["pairs"] = pairs;
}

const std::map<std::string, std::function<void(Run &, const CommandOptions &)>> &commands() {
  static const std::map<std::string, std::function<void(Run &, const CommandOptions &)>> table{
      {"levels", cmd_levels},
      {"simulate-histogram", cmd_simulate_histogram},
      {"fit-rates", cmd_fit_rates},
      {"fidelity-scan", cmd_fidelity_scan},
      {"prep-fidelity", cmd_prep_fidelity},
      {"alt-simulate", cmd_alt_simulate},
      {"alt-fidelity-scan", cmd_alt_fidelity_scan},
      {"trajectory", cmd_trajectory},
      {"filter-trajectory", cmd_filter_trajectory},
      {"dwell-rates", cmd_dwell_rates},
      {"rabi", cmd_rabi},
      {"ramsey", cmd_ramsey},
      {"endor", cmd_endor},
      {"match-peaks", cmd_match_peaks},
  };
  return table;
}

}  // namespace

void run_command(const std::string &name, const GlobalOptions &global, const CommandOptions &opts) {
  const auto it = commands().find(name);
  if (it == commands().end()) throw ValidationError("<subcommand>", "unknown subcommand '" + name + "'");

  Run run;
  run.manifest.started_utc = utc_now();
  run.cfg = load_config(global.config_path);
  run.manifest.subcommand = name;
  run.manifest.config_hash = sha256_hex(serialize_config(run.cfg));
  run.manifest.applied_defaults = run.cfg.applied_defaults;
  if (global.seed) run.plan.seed = *global.seed;
  else if (run.cfg.seed) run.plan.seed = *run.cfg.seed;
  else {
    run.plan.seed = fresh_seed();
    run.manifest.seed_generated = true;
  }
  run.manifest.seed = run.plan.seed;
  run.plan.threads = resolve_threads(global.threads);
  run.manifest.threads = run.plan.threads;
  run.out_dir = global.out_dir.value_or(run.cfg.output_dir);
  fs::create_directories(run.out_dir);

  it->second(run, opts);
  run.manifest.summary_json = run.summary.dump();
  const std::string manifest_path = write_manifest(run.out_dir, run.manifest, run.outputs);
  std::printf("%s\n", run.summary.dump(2).c_str());
  std::printf("manifest: %s\n", manifest_path.c_str());
}

}  // namespace repread::cli
