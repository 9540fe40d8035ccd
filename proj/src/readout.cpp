#include "repread/readout.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>

#include "repread/error.hpp"
#include "repread/hashing.hpp"
#include "repread/poisson.hpp"

namespace repread {

std::string to_string(HiddenState s) { return s == HiddenState::bright ? "bright" : "dark"; }

HiddenState parse_hidden_state(const std::string &name) {
  if (name == "bright" || name == "up") return HiddenState::bright;
  if (name == "dark" || name == "down") return HiddenState::dark;
  throw InvalidParameter("unknown hidden state '" + name + "'");
}

void ReadoutParams::validate() const {
  auto finite_nonneg = [](double x, const char *name) {
    if (!std::isfinite(x) || x < 0.0) throw InvalidParameter(std::string(name) + " must be finite and >= 0");
  };
  finite_nonneg(gamma_bright_hz, "gamma_bright");
  finite_nonneg(gamma_dark_hz, "gamma_dark");
  finite_nonneg(lambda_bright, "lambda_bright");
  finite_nonneg(lambda_dark, "lambda_dark");
  if (lambda_bright < lambda_dark) throw InvalidParameter("lambda_bright must be >= lambda_dark");
  if (!std::isfinite(t_rep_s) || t_rep_s <= 0.0) throw InvalidParameter("t_rep must be > 0");
  if (repetitions < 1) throw InvalidParameter("N must be >= 1");
}

std::string params_hash(const ReadoutParams &p) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%ld", p.gamma_bright_hz,
                p.gamma_dark_hz, p.lambda_bright, p.lambda_dark, p.t_rep_s, p.repetitions);
  return sha256_hex(buf).substr(0, 16);
}

double switch_probability(double rate_hz, double duration_s) {
  return -std::expm1(-rate_hz * duration_s);
}

TransitionMatrix per_rep_transition(const ReadoutParams &params) {
  params.validate();
  const double leave_bright = switch_probability(params.gamma_bright_hz, params.t_rep_s);
  const double leave_dark = switch_probability(params.gamma_dark_hz, params.t_rep_s);
  TransitionMatrix m;
  m.p[idx(HiddenState::bright)] = {1.0 - leave_bright, leave_bright};
  m.p[idx(HiddenState::dark)] = {leave_dark, 1.0 - leave_dark};
  return m;
}

namespace {

// out[n] = sum_j in[n - j] * kernel[j], truncated to in.size().
void convolve_truncated(const std::vector<double> &in, const std::vector<double> &kernel,
                        std::vector<double> &out) {
  const std::size_t n = in.size();
  out.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = in[i];
    if (w == 0.0) continue;
    const std::size_t jmax = std::min(kernel.size(), n - i);
    for (std::size_t j = 0; j < jmax; ++j) out[i + j] += w * kernel[j];
  }
}

}  // namespace

CountPmf count_distribution(const ReadoutParams &params, HiddenState initial,
                            std::optional<long> n_max) {
  params.validate();
  const long support =
      n_max ? *n_max : auto_support(params.lambda_bright * static_cast<double>(params.repetitions));
  if (support < 0) throw InvalidParameter("n_max must be >= 0");

  const TransitionMatrix t = per_rep_transition(params);
  const std::array<std::vector<double>, 2> kernels = {poisson_kernel(params.lambda_bright),
                                                      poisson_kernel(params.lambda_dark)};

  const auto len = static_cast<std::size_t>(support + 1);
  std::array<std::vector<double>, 2> cur = {std::vector<double>(len, 0.0),
                                            std::vector<double>(len, 0.0)};
  std::array<std::vector<double>, 2> emitted;
  cur[idx(initial)][0] = 1.0;

  constexpr auto B = idx(HiddenState::bright);
  constexpr auto D = idx(HiddenState::dark);
  for (long rep = 0; rep < params.repetitions; ++rep) {
    convolve_truncated(cur[B], kernels[B], emitted[B]);
    convolve_truncated(cur[D], kernels[D], emitted[D]);
    for (std::size_t n = 0; n < len; ++n) {
      const double b = emitted[B][n];
      const double d = emitted[D][n];
      cur[B][n] = b * t.p[B][B] + d * t.p[D][B];
      cur[D][n] = b * t.p[B][D] + d * t.p[D][D];
    }
  }

  double total = 0.0;
  for (std::size_t n = 0; n < len; ++n) total += cur[B][n] + cur[D][n];
  const double dropped = 1.0 - total;
  if (dropped > 1e-9) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "count support n_max=%ld drops tail mass %.3g (> 1e-9)", support,
                  dropped);
    throw TruncationError(buf);
  }

  CountPmf out;
  out.truncated_mass = std::max(0.0, dropped);
  out.marginal.offset = 0;
  out.marginal.p.resize(len);
  for (std::size_t n = 0; n < len; ++n) {
    cur[B][n] /= total;
    cur[D][n] /= total;
    out.marginal.p[n] = cur[B][n] + cur[D][n];
  }
  out.joint = std::move(cur);
  return out;
}

long sample_poisson(Engine &eng, double mean) {
  if (mean <= 0.0) return 0;
  std::poisson_distribution<long> dist(mean);
  return dist(eng);
}

BlockSampler::BlockSampler(const ReadoutParams &params) {
  params.validate();
  for (HiddenState s : {HiddenState::bright, HiddenState::dark}) {
    switch_p_[idx(s)] = switch_probability(params.switching_rate(s), params.t_rep_s);
    lambda_[idx(s)] = params.emission(s);
  }
}

BlockSampler::Outcome BlockSampler::run(Engine &eng, HiddenState state, long repetitions) const {
  Outcome out;
  long remaining = repetitions;
  while (remaining > 0) {
    const double p = switch_p_[idx(state)];
    long dwell = remaining;
    bool switches = false;
    if (p > 0.0) {
      std::geometric_distribution<long> geo(p);
      const long run = geo(eng) + 1;  // repetitions spent before the switch
      if (run <= remaining) {
        dwell = run;
        switches = true;
      }
    }
    out.count += sample_poisson(eng, lambda_[idx(state)] * static_cast<double>(dwell));
    remaining -= dwell;
    if (switches) state = other(state);
  }
  out.final_state = state;
  return out;
}

Histogram simulate_counts(const ReadoutParams &params, HiddenState initial,
                          std::uint64_t trials, const ChunkPlan &plan) {
  if (trials < 1) throw InvalidParameter("trials must be >= 1");
  const BlockSampler sampler(params);
  Histogram result;
  std::mutex merge_mutex;
  for_each_chunk(trials, plan, [&](std::uint64_t, std::uint64_t, std::uint64_t count, Engine &eng) {
    Histogram local;
    for (std::uint64_t i = 0; i < count; ++i)
      local.add(sampler.run(eng, initial, params.repetitions).count);
    std::lock_guard lock(merge_mutex);
    result.merge(local);
  });
  result.meta.seed = plan.seed;
  result.meta.params_hash = params_hash(params);
  result.meta.conditioning = "initial=" + to_string(initial);
  result.meta.repetitions = params.repetitions;
  return result;
}

TwoPointResult two_point_histogram(const ReadoutParams &params, const TwoPointSpec &spec,
                                   std::uint64_t trials, const ChunkPlan &plan) {
  if (spec.n1 < 1 || spec.n2 < 1) throw InvalidParameter("N1 and N2 must be >= 1");
  if (!(spec.crc_pass > 0.0 && spec.crc_pass <= 1.0))
    throw InvalidParameter("crc_pass must be in (0, 1]");
  if (trials < 1) throw InvalidParameter("trials must be >= 1");
  const BlockSampler sampler(params);

  TwoPointResult result;
  std::mutex merge_mutex;
  for_each_chunk(trials, plan, [&](std::uint64_t, std::uint64_t, std::uint64_t count, Engine &eng) {
    Histogram local;
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::uint64_t accepted = 0;
    for (std::uint64_t i = 0; i < count; ++i) {
      const HiddenState start = uni(eng) < 0.5 ? HiddenState::bright : HiddenState::dark;
      const auto r1 = sampler.run(eng, start, spec.n1);
      const auto r2 = sampler.run(eng, r1.final_state, spec.n2);
      const bool crc_ok = uni(eng) < spec.crc_pass;
      const bool prepared = spec.prepare == HiddenState::dark ? r1.count == 0
                                                              : r1.count >= spec.bright_threshold;
      if (prepared && crc_ok) {
        local.add(r2.count);
        ++accepted;
      }
    }
    std::lock_guard lock(merge_mutex);
    result.r2.merge(local);
    result.accepted += accepted;
  });
  result.attempted = trials;
  if (result.acceptance() < 1e-4) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "two-point conditioning accepted %llu of %llu trials (< 1e-4)",
                  static_cast<unsigned long long>(result.accepted),
                  static_cast<unsigned long long>(trials));
    throw InsufficientStatistics(buf);
  }
  result.r2.meta.seed = plan.seed;
  result.r2.meta.params_hash = params_hash(params);
  result.r2.meta.conditioning = "prepare=" + to_string(spec.prepare) +
                                (spec.prepare == HiddenState::dark
                                     ? std::string(";R1==0")
                                     : ";R1>=" + std::to_string(spec.bright_threshold));
  result.r2.meta.repetitions = spec.n2;
  return result;
}

}  // namespace repread
