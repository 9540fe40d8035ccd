#pragma once

#include <vector>

#include "repread/histogram.hpp"
#include "repread/readout.hpp"

namespace repread {

/// Threshold policy on a scalar outcome. Outcomes <= dark_max read "dark",
/// outcomes >= bright_min read "bright", anything between is inconclusive.
/// For the alternating scheme "dark" is the down state and "bright" up.
struct ThresholdPolicy {
  long dark_max = 0;
  long bright_min = 1;

  bool single_threshold() const { return bright_min == dark_max + 1; }
};

struct FidelityPoint {
  long repetitions = 0;  // N (or N_pairs)
  ThresholdPolicy policy;
  double f_dark = 0.0;
  double f_bright = 0.0;
  double f_avg = 0.0;
  double eta = 0.0;

  double infidelity() const { return 1.0 - f_avg; }
};

/// Fidelities against the state at block start from the two conditional
/// outcome pmfs. Equal priors. Throws EmptyConclusiveRegion when either
/// state has zero conclusive probability or the thresholds overlap.
FidelityPoint evaluate_policy(const DiscretePmf &given_bright, const DiscretePmf &given_dark,
                              const ThresholdPolicy &policy, long repetitions);

FidelityPoint readout_fidelity(const ReadoutParams &params, const ThresholdPolicy &policy);

/// Policies with dark_max in [dark_max_lo, dark_max_hi] and bright_min in
/// [dark_max + 1, bright_min_hi].
struct PolicyGrid {
  long dark_max_lo = 0;
  long dark_max_hi = 5;
  long bright_min_hi = 40;

  std::vector<ThresholdPolicy> policies() const;
};

struct FidelityScan {
  std::vector<FidelityPoint> points;
  std::vector<FidelityPoint> pareto;  // ascending eta
};

/// Non-dominated points for (maximize eta, minimize infidelity), sorted by
/// ascending eta. Along the front infidelity is strictly increasing.
std::vector<FidelityPoint> pareto_front(const std::vector<FidelityPoint> &points);

/// Evaluates every policy for every N. Policies leaving a state with no
/// conclusive outcomes are skipped.
FidelityScan fidelity_scan(const ReadoutParams &params, const std::vector<long> &n_list,
                           const PolicyGrid &grid);

/// Inclusive count window used to condition on a readout result.
struct CountCondition {
  long n_min = 0;
  long n_max = 0;
};

struct PreparationResult {
  double p_bright = 0.0;  // P(final state bright | n in window)
  double p_dark = 0.0;
  double p_condition = 0.0;  // P(n in window), equal priors
};

/// Posterior over the hidden state at the end of the block, given the count
/// falls in `condition`. Throws InsufficientStatistics on a zero-probability
/// window.
PreparationResult preparation_fidelity(const ReadoutParams &params, const CountCondition &condition);

}  // namespace repread
