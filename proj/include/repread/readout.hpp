#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "repread/histogram.hpp"
#include "repread/random.hpp"

namespace repread {

/// Hidden nuclear state under the conditional readout. "Bright" is the state
/// the readout gate maps onto photon emission.
enum class HiddenState : std::uint8_t { bright = 0, dark = 1 };

inline constexpr std::size_t idx(HiddenState s) { return static_cast<std::size_t>(s); }
inline constexpr HiddenState other(HiddenState s) {
  return s == HiddenState::bright ? HiddenState::dark : HiddenState::bright;
}
std::string to_string(HiddenState s);
HiddenState parse_hidden_state(const std::string &name);

/// Calibrated stochastic model of single-sided repetitive readout.
struct ReadoutParams {
  double gamma_bright_hz = 0.0;  // decay out of the bright state
  double gamma_dark_hz = 0.0;    // decay out of the dark state
  double lambda_bright = 0.0;    // mean photons per repetition, bright
  double lambda_dark = 0.0;      // mean photons per repetition, dark
  double t_rep_s = 0.0;          // duration of one reading step
  long repetitions = 1;          // N

  /// Throws InvalidParameter. Allows lambda_bright == lambda_dark so the
  /// uninformative limit stays reachable.
  void validate() const;
  ReadoutParams with_repetitions(long n) const {
    ReadoutParams p = *this;
    p.repetitions = n;
    return p;
  }
  double emission(HiddenState s) const {
    return s == HiddenState::bright ? lambda_bright : lambda_dark;
  }
  double switching_rate(HiddenState s) const {
    return s == HiddenState::bright ? gamma_bright_hz : gamma_dark_hz;
  }
};

std::string params_hash(const ReadoutParams &p);

/// Row-stochastic 2x2 matrix indexed [from][to] by HiddenState.
struct TransitionMatrix {
  std::array<std::array<double, 2>, 2> p{};

  double operator()(HiddenState from, HiddenState to) const { return p[idx(from)][idx(to)]; }
};

/// Per-repetition switching: P(leave s) = 1 - exp(-gamma_s * t_rep).
TransitionMatrix per_rep_transition(const ReadoutParams &params);
double switch_probability(double rate_hz, double duration_s);

/// Distribution of summed photon counts over one readout block.
struct CountPmf {
  DiscretePmf marginal;
  // joint[s][n] = P(final hidden state s, total count n).
  std::array<std::vector<double>, 2> joint;
  double truncated_mass = 0.0;

  long n_max() const { return marginal.max_value(); }
  double operator[](long n) const { return marginal[n]; }
};

/// Exact DP over (hidden state, cumulative count). `n_max` overrides the
/// automatic support size; throws TruncationError if the dropped tail
/// exceeds 1e-9.
CountPmf count_distribution(const ReadoutParams &params, HiddenState initial,
                            std::optional<long> n_max = std::nullopt);

/// Samples photon totals of one readout block. Dwell lengths are drawn as
/// geometric runs of repetitions, which is distributionally identical to a
/// per-repetition switch test.
class BlockSampler {
 public:
  explicit BlockSampler(const ReadoutParams &params);

  struct Outcome {
    long count = 0;
    HiddenState final_state = HiddenState::bright;
  };
  Outcome run(Engine &eng, HiddenState initial, long repetitions) const;

 private:
  std::array<double, 2> switch_p_{};
  std::array<double, 2> lambda_{};
};

long sample_poisson(Engine &eng, double mean);

Histogram simulate_counts(const ReadoutParams &params, HiddenState initial,
                          std::uint64_t trials, const ChunkPlan &plan);

/// Two-readout scheme: R1 (N1 repetitions) prepares, R2 (N2) is recorded.
struct TwoPointSpec {
  long n1 = 300;
  long n2 = 300;
  HiddenState prepare = HiddenState::dark;
  long bright_threshold = 3;  // R1 >= threshold accepts a bright preparation
  double crc_pass = 1.0;      // state-independent keep probability
};

struct TwoPointResult {
  Histogram r2;
  std::uint64_t attempted = 0;
  std::uint64_t accepted = 0;
  double acceptance() const {
    return attempted ? static_cast<double>(accepted) / static_cast<double>(attempted) : 0.0;
  }
};

/// The hidden state at R1 start is drawn with equal priors. R1 accepts dark
/// preparations on zero photons and bright ones on R1 >= bright_threshold.
/// Throws InsufficientStatistics when fewer than 1e-4 of trials survive.
TwoPointResult two_point_histogram(const ReadoutParams &params, const TwoPointSpec &spec,
                                   std::uint64_t trials, const ChunkPlan &plan);

}  // namespace repread
