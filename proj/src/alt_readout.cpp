#include "repread/alt_readout.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <mutex>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_bessel.h>

#include "repread/error.hpp"
#include "repread/poisson.hpp"

namespace repread {

namespace {

constexpr std::size_t kUpSlot = 0;
constexpr std::size_t kDownSlot = 1;

// Emission mean of hidden state s in a slot addressing `slot`.
double slot_emission(const ReadoutParams &base, std::size_t slot, HiddenState s) {
  const bool addressed = (slot == kUpSlot) == (s == HiddenState::bright);
  return addressed ? base.lambda_bright : base.lambda_dark;
}

struct GslQuiet {
  GslQuiet() { gsl_set_error_handler_off(); }
};

}  // namespace

double skellam_pmf(double mu1, double mu2, long k) {
  if (!(mu1 >= 0.0) || !(mu2 >= 0.0) || !std::isfinite(mu1) || !std::isfinite(mu2))
    throw InvalidParameter("Skellam means must be finite and >= 0");
  if (mu2 == 0.0) return poisson_pmf(mu1, k);
  if (mu1 == 0.0) return poisson_pmf(mu2, -k);

  static const GslQuiet quiet;
  const double x = 2.0 * std::sqrt(mu1 * mu2);
  gsl_sf_result scaled;
  const int status = gsl_sf_bessel_In_scaled_e(static_cast<int>(std::labs(k)), x, &scaled);
  if (status == GSL_EUNDRFLW || scaled.val <= 0.0) return 0.0;
  if (status != GSL_SUCCESS) throw InvalidParameter(std::string("Bessel evaluation failed: ") + gsl_strerror(status));
  const double s1 = std::sqrt(mu1), s2 = std::sqrt(mu2);
  const double log_p = -(s1 - s2) * (s1 - s2) + 0.5 * static_cast<double>(k) * (std::log(mu1) - std::log(mu2)) +
                       std::log(scaled.val);
  return std::exp(log_p);
}

void AltReadoutParams::validate() const {
  base.validate();
  if (n_pairs < 1) throw InvalidParameter("N_pairs must be >= 1");
}

SlotSwitching addressed_slot_switching(const ReadoutParams &base) {
  const double addressed = switch_probability(base.gamma_bright_hz, base.t_rep_s);
  const double unaddressed = switch_probability(base.gamma_dark_hz, base.t_rep_s);
  SlotSwitching s{};
  s[kUpSlot][idx(HiddenState::bright)] = addressed;
  s[kUpSlot][idx(HiddenState::dark)] = unaddressed;
  s[kDownSlot][idx(HiddenState::bright)] = unaddressed;
  s[kDownSlot][idx(HiddenState::dark)] = addressed;
  return s;
}

SlotSwitching uniform_slot_switching(double rate_up_hz, double rate_down_hz, double t_slot_s) {
  const double up = switch_probability(rate_up_hz, t_slot_s);
  const double down = switch_probability(rate_down_hz, t_slot_s);
  SlotSwitching s{};
  for (auto &slot : s) {
    slot[idx(HiddenState::bright)] = up;
    slot[idx(HiddenState::dark)] = down;
  }
  return s;
}

DiffPmf diff_distribution(const AltReadoutParams &params, HiddenState initial, std::optional<long> k_max) {
  params.validate();
  return diff_distribution(params, addressed_slot_switching(params.base), initial, k_max);
}

DiffPmf diff_distribution(const AltReadoutParams &params, const SlotSwitching &switching,
                          HiddenState initial, std::optional<long> k_max) {
  params.validate();
  const long kk = k_max ? *k_max
                        : auto_support(params.base.lambda_bright * static_cast<double>(params.n_pairs));
  if (kk < 0) throw InvalidParameter("k_max must be >= 0");
  const auto len = static_cast<std::size_t>(2 * kk + 1);

  // kernels[slot][state]
  std::array<std::array<std::vector<double>, 2>, 2> kernels;
  for (std::size_t slot : {kUpSlot, kDownSlot})
    for (HiddenState s : {HiddenState::bright, HiddenState::dark})
      kernels[slot][idx(s)] = poisson_kernel(slot_emission(params.base, slot, s));

  std::array<std::vector<double>, 2> cur = {std::vector<double>(len, 0.0), std::vector<double>(len, 0.0)};
  std::array<std::vector<double>, 2> emitted = cur;
  cur[idx(initial)][static_cast<std::size_t>(kk)] = 1.0;

  auto emit = [&](const std::vector<double> &in, const std::vector<double> &kernel, bool positive,
                  std::vector<double> &out) {
    std::fill(out.begin(), out.end(), 0.0);
    const long n = static_cast<long>(len);
    for (long i = 0; i < n; ++i) {
      const double w = in[i];
      if (w == 0.0) continue;
      for (long j = 0; j < static_cast<long>(kernel.size()); ++j) {
        const long t = positive ? i + j : i - j;
        if (t < 0 || t >= n) break;
        out[t] += w * kernel[j];
      }
    }
  };

  constexpr auto U = idx(HiddenState::bright);
  constexpr auto D = idx(HiddenState::dark);
  for (long pair = 0; pair < params.n_pairs; ++pair) {
    for (std::size_t slot : {kUpSlot, kDownSlot}) {
      const bool positive = slot == kUpSlot;
      emit(cur[U], kernels[slot][U], positive, emitted[U]);
      emit(cur[D], kernels[slot][D], positive, emitted[D]);
      const double leave_u = switching[slot][U];
      const double leave_d = switching[slot][D];
      for (std::size_t i = 0; i < len; ++i) {
        const double u = emitted[U][i], d = emitted[D][i];
        cur[U][i] = u * (1.0 - leave_u) + d * leave_d;
        cur[D][i] = u * leave_u + d * (1.0 - leave_d);
      }
    }
  }

  double total = 0.0;
  for (std::size_t i = 0; i < len; ++i) total += cur[U][i] + cur[D][i];
  const double dropped = 1.0 - total;
  if (dropped > 1e-9) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "difference support k_max=%ld drops tail mass %.3g (> 1e-9)", kk, dropped);
    throw TruncationError(buf);
  }
  DiffPmf out;
  out.truncated_mass = std::max(0.0, dropped);
  out.marginal.offset = -kk;
  out.marginal.p.resize(len);
  for (std::size_t i = 0; i < len; ++i) {
    cur[U][i] /= total;
    cur[D][i] /= total;
    out.marginal.p[i] = cur[U][i] + cur[D][i];
  }
  out.joint = std::move(cur);
  return out;
}

namespace {

// Samples one alternating block by drawing whole dwell runs: the number of
// full slot pairs survived is geometric, the switching slot inside the
// failing pair is then chosen by its conditional probability.
class AltBlockSampler {
 public:
  AltBlockSampler(const ReadoutParams &base, const SlotSwitching &switching) : switching_(switching) {
    for (std::size_t slot : {kUpSlot, kDownSlot})
      for (HiddenState s : {HiddenState::bright, HiddenState::dark})
        lambda_[slot][idx(s)] = slot_emission(base, slot, s);
  }

  struct Outcome {
    long n_up_slots = 0;
    long n_down_slots = 0;
    HiddenState final_state = HiddenState::bright;
    long diff() const { return n_up_slots - n_down_slots; }
  };

  Outcome run(Engine &eng, HiddenState state, long pairs) const {
    Outcome out;
    long remaining = 2 * pairs;
    std::size_t parity = kUpSlot;
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    while (remaining > 0) {
      const double a = switching_[parity][idx(state)];
      const double b = switching_[1 - parity][idx(state)];
      const double fail_pair = a + (1.0 - a) * b;
      long length = remaining;
      bool switches = false;
      if (fail_pair > 0.0) {
        std::geometric_distribution<long> geo(fail_pair);
        const long survived = geo(eng);
        const long run = 2 * survived + (uni(eng) * fail_pair < a ? 1 : 2);
        if (run <= remaining) {
          length = run;
          switches = true;
        }
      }
      const long same_parity = (length + 1) / 2;
      const long other_parity = length / 2;
      const long n_same = sample_poisson(eng, lambda_[parity][idx(state)] * static_cast<double>(same_parity));
      const long n_other =
          sample_poisson(eng, lambda_[1 - parity][idx(state)] * static_cast<double>(other_parity));
      (parity == kUpSlot ? out.n_up_slots : out.n_down_slots) += n_same;
      (parity == kUpSlot ? out.n_down_slots : out.n_up_slots) += n_other;
      remaining -= length;
      if (length % 2 == 1) parity = 1 - parity;
      if (switches) state = other(state);
    }
    out.final_state = state;
    return out;
  }

 private:
  SlotSwitching switching_;
  std::array<std::array<double, 2>, 2> lambda_{};
};

}  // namespace

Histogram simulate_alt(const AltReadoutParams &params, HiddenState initial, std::uint64_t trials,
                       const ChunkPlan &plan) {
  params.validate();
  if (trials < 1) throw InvalidParameter("trials must be >= 1");
  const AltBlockSampler sampler(params.base, addressed_slot_switching(params.base));
  Histogram result;
  std::mutex merge_mutex;
  for_each_chunk(trials, plan, [&](std::uint64_t, std::uint64_t, std::uint64_t count, Engine &eng) {
    Histogram local;
    for (std::uint64_t i = 0; i < count; ++i) local.add(sampler.run(eng, initial, params.n_pairs).diff());
    std::lock_guard lock(merge_mutex);
    result.merge(local);
  });
  result.meta.seed = plan.seed;
  result.meta.params_hash = params_hash(params.base.with_repetitions(2 * params.n_pairs));
  result.meta.conditioning = "initial=" + std::string(initial == HiddenState::bright ? "up" : "down");
  result.meta.repetitions = params.n_pairs;
  return result;
}

FidelityPoint alt_fidelity(const AltReadoutParams &params, const ThresholdPolicy &policy) {
  if (policy.bright_min <= policy.dark_max)
    throw EmptyConclusiveRegion("k_up_min must exceed k_down_max");
  const DiffPmf up = diff_distribution(params, HiddenState::bright);
  const DiffPmf down = diff_distribution(params, HiddenState::dark);
  return evaluate_policy(up.marginal, down.marginal, policy, params.n_pairs);
}

std::vector<ThresholdPolicy> alt_policy_grid(long k_hi) {
  std::vector<ThresholdPolicy> out;
  for (long d = -k_hi; d < k_hi; ++d)
    for (long u = d + 1; u <= k_hi; ++u) out.push_back({d, u});
  return out;
}

FidelityScan alt_fidelity_scan(const AltReadoutParams &params, const std::vector<long> &pairs_list,
                               const std::vector<ThresholdPolicy> &policies) {
  if (pairs_list.empty() || policies.empty()) throw InvalidParameter("empty scan grid");
  FidelityScan scan;
  for (long pairs : pairs_list) {
    AltReadoutParams p = params;
    p.n_pairs = pairs;
    const DiffPmf up = diff_distribution(p, HiddenState::bright);
    const DiffPmf down = diff_distribution(p, HiddenState::dark);
    for (const ThresholdPolicy &policy : policies) {
      if (policy.bright_min <= policy.dark_max) continue;
      try {
        scan.points.push_back(evaluate_policy(up.marginal, down.marginal, policy, pairs));
      } catch (const EmptyConclusiveRegion &) {
      }
    }
  }
  scan.pareto = pareto_front(scan.points);
  return scan;
}

TwoPointResult alt_two_point_histogram(const AltReadoutParams &params, const AltTwoPointSpec &spec,
                                       std::uint64_t trials, const ChunkPlan &plan) {
  params.validate();
  if (spec.pairs1 < 1 || spec.pairs2 < 1) throw InvalidParameter("pair counts must be >= 1");
  if (!(spec.crc_pass > 0.0 && spec.crc_pass <= 1.0)) throw InvalidParameter("crc_pass must be in (0, 1]");
  const AltBlockSampler sampler(params.base, addressed_slot_switching(params.base));

  auto prepared = [&](const AltBlockSampler::Outcome &r1) {
    const bool up = spec.prepare == HiddenState::bright;
    if (spec.conditioning == AltConditioning::signed_difference)
      return up ? r1.diff() >= spec.threshold : r1.diff() <= -spec.threshold;
    return (up ? r1.n_up_slots : r1.n_down_slots) >= spec.threshold;
  };

  TwoPointResult result;
  std::mutex merge_mutex;
  for_each_chunk(trials, plan, [&](std::uint64_t, std::uint64_t, std::uint64_t count, Engine &eng) {
    Histogram local;
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::uint64_t accepted = 0;
    for (std::uint64_t i = 0; i < count; ++i) {
      const HiddenState start = uni(eng) < 0.5 ? HiddenState::bright : HiddenState::dark;
      const auto r1 = sampler.run(eng, start, spec.pairs1);
      const auto r2 = sampler.run(eng, r1.final_state, spec.pairs2);
      const bool crc_ok = uni(eng) < spec.crc_pass;
      if (prepared(r1) && crc_ok) {
        local.add(r2.diff());
        ++accepted;
      }
    }
    std::lock_guard lock(merge_mutex);
    result.r2.merge(local);
    result.accepted += accepted;
  });
  result.attempted = trials;
  if (result.acceptance() < 1e-4)
    throw InsufficientStatistics("alternating two-point conditioning accepted fewer than 1e-4 of trials");
  result.r2.meta.seed = plan.seed;
  result.r2.meta.conditioning = std::string("prepare=") + (spec.prepare == HiddenState::bright ? "up" : "down") +
                                (spec.conditioning == AltConditioning::signed_difference ? ";signed" : ";single");
  result.r2.meta.repetitions = spec.pairs2;
  return result;
}

AltRateFit fit_alt_rates(const std::vector<ObservedDiffHistogram> &data, const ReadoutParams &base,
                         double init_up_hz, double init_down_hz, const FitOptions &opts) {
  base.validate();
  bool has_up = false, has_down = false;
  for (const auto &obs : data) (obs.initial == HiddenState::bright ? has_up : has_down) = true;
  if (!has_up || !has_down) throw InvalidParameter("need at least one histogram per initial state");

  PositiveFitProblem problem;
  problem.initial = {init_up_hz, init_down_hz};
  problem.fixed = {false, false};
  problem.on_grid = {true, true};
  problem.log_likelihood = [&](const std::vector<double> &rates) {
    const SlotSwitching sw = uniform_slot_switching(rates[0], rates[1], base.t_rep_s);
    std::map<std::pair<int, long>, DiffPmf> cache;
    double ll = 0.0;
    for (const auto &obs : data) {
      const auto key = std::make_pair(static_cast<int>(obs.initial), obs.n_pairs);
      auto it = cache.find(key);
      if (it == cache.end()) {
        AltReadoutParams p{base, obs.n_pairs};
        long kk = auto_support(base.lambda_bright * static_cast<double>(obs.n_pairs));
        for (const auto &o : data)
          if (o.n_pairs == obs.n_pairs)
            kk = std::max({kk, o.histogram.max_value(), -o.histogram.offset()});
        it = cache.emplace(key, diff_distribution(p, sw, obs.initial, kk)).first;
      }
      const Histogram &h = obs.histogram;
      for (std::size_t i = 0; i < h.counts().size(); ++i) {
        if (h.counts()[i] == 0) continue;
        const double p = it->second[h.offset() + static_cast<long>(i)];
        ll += static_cast<double>(h.counts()[i]) * (p > 0.0 ? std::max(std::log(p), -690.0) : -690.0);
      }
    }
    return ll;
  };
  const PositiveFitResult r = maximize_positive_likelihood(problem, opts);
  AltRateFit fit;
  fit.gamma_up_hz = r.values[0];
  fit.gamma_down_hz = r.values[1];
  fit.log_likelihood = r.log_likelihood;
  fit.half_width = {r.half_width[0], r.half_width[1]};
  fit.converged = r.converged;
  if (!fit.converged) {
    RateFit best;
    best.estimate = base;
    best.estimate.gamma_bright_hz = fit.gamma_up_hz;
    best.estimate.gamma_dark_hz = fit.gamma_down_hz;
    best.log_likelihood = fit.log_likelihood;
    throw ConvergenceError("alternating rate fit hit the evaluation cap", best);
  }
  return fit;
}

}  // namespace repread
