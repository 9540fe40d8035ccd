#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "repread/readout.hpp"

namespace repread {

/// Binned photon-count record. Each bin sums `n_bin` reading steps.
struct Trajectory {
  double bin_duration_s = 0.0;
  long n_bin = 1;
  std::vector<long> counts;
  std::optional<std::vector<HiddenState>> true_states;  // simulation only
  std::vector<double> jump_times_s;                      // simulation only
  std::string params_hash;
  std::uint64_t seed = 0;

  std::size_t size() const { return counts.size(); }
  void validate() const;
};

struct FilterResult {
  std::vector<double> filtered;  // P(bright | counts up to bin)
  std::vector<double> smoothed;  // P(bright | all counts); empty after filtering only
  double log_evidence = 0.0;
};

struct DwellStats {
  std::array<double, 2> mean_dwell_s{};  // indexed by HiddenState
  std::array<long, 2> dwell_count{};
  long jumps = 0;
  std::array<double, 2> rate_hz{};
  std::array<double, 2> rate_se_hz{};
};

/// Exact jump-time simulation of the two-state process. Bin counts are
/// Poisson with the emission mean integrated over the in-bin occupancy; the
/// recorded true state is the one occupying the larger part of the bin
/// (dark on an exact tie). Without `initial` the start is drawn from the
/// stationary distribution.
Trajectory simulate_trajectory(const ReadoutParams &params, double t_total_s, long n_bin,
                               std::uint64_t seed,
                               std::optional<HiddenState> initial = std::nullopt);

/// Forward pass. `params.t_rep_s * n_bin` must match the bin duration.
FilterResult hmm_filter(const Trajectory &traj, const ReadoutParams &params);

/// Forward-backward pass; fills both posteriors.
FilterResult hmm_smooth(const Trajectory &traj, const ReadoutParams &params);

/// Bright iff posterior > threshold. Uses the smoothed posterior when present.
std::vector<HiddenState> assign_states(const FilterResult &fr, double p_threshold = 0.5);

/// Rates from uncensored dwell lengths. Throws InsufficientJumps when the
/// path has fewer than two jumps or a state has no complete dwell.
DwellStats dwell_time_rates(const std::vector<HiddenState> &path, double bin_duration_s);

}  // namespace repread
