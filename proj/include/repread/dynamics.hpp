#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "repread/fidelity.hpp"

namespace repread {

/// Maps the probability of ending in the bright state onto the probability
/// of a bright readout outcome: p = 0 gives 1 - F_dark, p = 1 gives F_bright.
/// {1, 1} is the identity.
struct ContrastMap {
  double f_dark = 1.0;
  double f_bright = 1.0;

  static ContrastMap from(const FidelityPoint &fp) { return {fp.f_dark, fp.f_bright}; }
  void validate() const;
  double apply(double p_bright) const { return (1.0 - f_dark) + (f_dark + f_bright - 1.0) * p_bright; }
  double dark_endpoint() const { return apply(0.0); }
  double bright_endpoint() const { return apply(1.0); }
};

struct RabiConfig {
  double rabi_frequency_khz = 1.0;
  std::vector<double> durations_s;
  ContrastMap contrast;

  void validate() const;
};

std::vector<double> rabi_signal(const RabiConfig &cfg);

struct RamseyConfig {
  double detuning_khz = 1.0;
  double t2_star_s = 7.4e-3;
  double decay_exponent = 2.0;
  std::optional<double> beat_splitting_khz;
  std::vector<double> durations_s;
  ContrastMap contrast;

  void validate() const;
};

/// Decay and beat envelope at time t, before contrast mapping.
double ramsey_envelope(const RamseyConfig &cfg, double t);
std::vector<double> ramsey_signal(const RamseyConfig &cfg);

/// Replaces each probability with the bright fraction of `shots` Bernoulli
/// trials drawn at that probability.
std::vector<double> sample_signal(const std::vector<double> &probabilities, long shots, std::uint64_t seed);

struct RamseyFitOptions {
  double detuning_lo_khz = 0.05;
  double detuning_hi_khz = 5.0;
  double beat_hi_khz = 2.0;
  double t2_lo_s = 0.5e-3;
  double t2_hi_s = 50e-3;
  int grid_detuning = 100;
  int grid_beat = 41;
  int grid_t2 = 12;
};

struct RamseyFit {
  double detuning_khz = 0.0;
  double beat_splitting_khz = 0.0;
  double t2_star_s = 0.0;
  double residual_ss = 0.0;
  bool converged = false;
};

/// Least-squares refit of detuning, beat splitting and T2* with the decay
/// exponent and contrast taken from `model`. The product of the detuning
/// and beat cosines is symmetric under swapping the two frequencies; the fit
/// keeps the branch with beat/2 < detuning.
RamseyFit fit_ramsey(const std::vector<double> &durations_s, const std::vector<double> &signal,
                     const RamseyConfig &model, const RamseyFitOptions &opts = {});

}  // namespace repread
