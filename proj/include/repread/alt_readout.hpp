#pragma once

#include <array>
#include <optional>
#include <vector>

#include "repread/fidelity.hpp"
#include "repread/rate_fit.hpp"
#include "repread/readout.hpp"

namespace repread {

// Alternating two-sided readout. Each pair is an up-addressed slot followed
// by a down-addressed slot; the recorded outcome is k = n_up_slots -
// n_down_slots. HiddenState::bright stands for "up" and dark for "down".

/// P(K = k) for K = X1 - X2 with independent X1 ~ Poisson(mu1), X2 ~ Poisson(mu2),
/// via the exponentially scaled modified Bessel function.
double skellam_pmf(double mu1, double mu2, long k);

struct AltReadoutParams {
  ReadoutParams base;  // repetitions ignored; t_rep_s is one slot
  long n_pairs = 1;

  void validate() const;
};

/// Per-slot switching probabilities, indexed [slot][state], slot 0 = up.
using SlotSwitching = std::array<std::array<double, 2>, 2>;

/// The addressed state decays at gamma_bright, the other at gamma_dark.
SlotSwitching addressed_slot_switching(const ReadoutParams &base);

/// Switching that ignores addressing: state s leaves at rate[s] every slot.
SlotSwitching uniform_slot_switching(double rate_up_hz, double rate_down_hz, double t_slot_s);

struct DiffPmf {
  DiscretePmf marginal;                    // support [-k_max, k_max]
  std::array<std::vector<double>, 2> joint;  // [final state][k + k_max]
  double truncated_mass = 0.0;

  long k_max() const { return marginal.max_value(); }
  double operator[](long k) const { return marginal[k]; }
};

DiffPmf diff_distribution(const AltReadoutParams &params, HiddenState initial,
                          std::optional<long> k_max = std::nullopt);

/// DP with an explicit per-slot switching table (used by the rate refit).
DiffPmf diff_distribution(const AltReadoutParams &params, const SlotSwitching &switching,
                          HiddenState initial, std::optional<long> k_max = std::nullopt);

/// Monte-Carlo histogram of k over `trials` blocks of n_pairs pairs.
Histogram simulate_alt(const AltReadoutParams &params, HiddenState initial, std::uint64_t trials,
                       const ChunkPlan &plan);

/// policy.dark_max is k_down_max, policy.bright_min is k_up_min.
FidelityPoint alt_fidelity(const AltReadoutParams &params, const ThresholdPolicy &policy);

/// Symmetric policy grid: k_down_max in [-k_hi, k_hi-1], k_up_min in
/// (k_down_max, k_hi].
std::vector<ThresholdPolicy> alt_policy_grid(long k_hi);

FidelityScan alt_fidelity_scan(const AltReadoutParams &params, const std::vector<long> &pairs_list,
                               const std::vector<ThresholdPolicy> &policies);

enum class AltConditioning { signed_difference, single_sided };

struct AltTwoPointSpec {
  long pairs1 = 50;
  long pairs2 = 50;
  HiddenState prepare = HiddenState::bright;
  AltConditioning conditioning = AltConditioning::signed_difference;
  long threshold = 2;
  double crc_pass = 1.0;
};

/// Signed conditioning accepts up on k1 >= threshold and down on
/// k1 <= -threshold. Single-sided uses only the slots addressing the
/// prepared state: its count must reach `threshold`.
TwoPointResult alt_two_point_histogram(const AltReadoutParams &params, const AltTwoPointSpec &spec,
                                       std::uint64_t trials, const ChunkPlan &plan);

struct ObservedDiffHistogram {
  Histogram histogram;
  HiddenState initial = HiddenState::bright;
  long n_pairs = 1;
};

struct AltRateFit {
  double gamma_up_hz = 0.0;    // effective rate out of up
  double gamma_down_hz = 0.0;  // effective rate out of down
  double log_likelihood = 0.0;
  std::array<double, 2> half_width{};
  bool converged = false;
};

/// Fits effective per-state switching rates (addressing-independent) to
/// alternating-readout histograms, emission means held at `base`.
AltRateFit fit_alt_rates(const std::vector<ObservedDiffHistogram> &data, const ReadoutParams &base,
                         double init_up_hz, double init_down_hz, const FitOptions &opts = {});

}  // namespace repread
