#include "repread/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "repread/error.hpp"
#include "repread/poisson.hpp"

namespace repread {

void Trajectory::validate() const {
  if (!(bin_duration_s > 0.0) || !std::isfinite(bin_duration_s))
    throw ValidationError("trajectory.bin_duration", "must be > 0");
  if (n_bin < 1) throw ValidationError("trajectory.N_bin", "must be >= 1");
  if (counts.empty()) throw ValidationError("trajectory.counts", "empty trajectory");
  for (std::size_t i = 0; i < counts.size(); ++i)
    if (counts[i] < 0) throw ValidationError("trajectory.counts[" + std::to_string(i) + "]", "negative count");
  if (true_states && true_states->size() != counts.size())
    throw ValidationError("trajectory.true_states", "length differs from counts");
}

namespace {

double stationary_bright(const ReadoutParams &p) {
  const double total = p.gamma_bright_hz + p.gamma_dark_hz;
  return total > 0.0 ? p.gamma_dark_hz / total : 0.5;
}

// Bin transition matrix of the continuous-time chain, [from][to].
TransitionMatrix bin_transition(const ReadoutParams &p, double dt) {
  const double a = p.gamma_bright_hz, c = p.gamma_dark_hz, total = a + c;
  TransitionMatrix m;
  if (total == 0.0) {
    m.p = {{{1.0, 0.0}, {0.0, 1.0}}};
    return m;
  }
  const double relax = -std::expm1(-total * dt);  // 1 - exp(-(a+c) dt)
  const double leave_bright = a / total * relax;
  const double leave_dark = c / total * relax;
  m.p[idx(HiddenState::bright)] = {1.0 - leave_bright, leave_bright};
  m.p[idx(HiddenState::dark)] = {leave_dark, 1.0 - leave_dark};
  return m;
}

struct Emissions {
  double log_mean_b, log_mean_d, mean_b, mean_d;
  std::vector<double> log_factorial;

  Emissions(const ReadoutParams &p, long n_bin, long max_count)
      : mean_b(p.lambda_bright * static_cast<double>(n_bin)),
        mean_d(p.lambda_dark * static_cast<double>(n_bin)) {
    log_mean_b = mean_b > 0.0 ? std::log(mean_b) : -std::numeric_limits<double>::infinity();
    log_mean_d = mean_d > 0.0 ? std::log(mean_d) : -std::numeric_limits<double>::infinity();
    log_factorial.resize(static_cast<std::size_t>(max_count) + 1);
    for (long k = 0; k <= max_count; ++k) log_factorial[k] = std::lgamma(k + 1.0);
  }

  static double term(long k, double mean, double log_mean) {
    if (k == 0) return -mean;
    return mean > 0.0 ? k * log_mean - mean : -std::numeric_limits<double>::infinity();
  }

  // Scaled likelihoods e[s] and the log of the scale removed.
  double scaled(long k, std::array<double, 2> &e) const {
    const double lb = term(k, mean_b, log_mean_b), ld = term(k, mean_d, log_mean_d);
    const double m = std::max(lb, ld);
    if (!std::isfinite(m)) throw ValidationError("trajectory.counts", "bin has zero probability under both states");
    e[idx(HiddenState::bright)] = std::exp(lb - m);
    e[idx(HiddenState::dark)] = std::exp(ld - m);
    return m - log_factorial[k];
  }
};

void check_consistent(const Trajectory &traj, const ReadoutParams &params) {
  params.validate();
  traj.validate();
  const double expected = params.t_rep_s * static_cast<double>(traj.n_bin);
  if (std::abs(expected - traj.bin_duration_s) > 1e-9 * expected)
    throw ValidationError("trajectory.bin_duration", "does not equal N_bin * t_rep");
}

}  // namespace

Trajectory simulate_trajectory(const ReadoutParams &params, double t_total_s, long n_bin,
                               std::uint64_t seed, std::optional<HiddenState> initial) {
  params.validate();
  if (n_bin < 1) throw InvalidParameter("N_bin must be >= 1");
  Trajectory traj;
  traj.n_bin = n_bin;
  traj.bin_duration_s = params.t_rep_s * static_cast<double>(n_bin);
  traj.seed = seed;
  traj.params_hash = params_hash(params.with_repetitions(n_bin));
  if (!(t_total_s >= traj.bin_duration_s)) throw InvalidParameter("T_total must be >= bin duration");
  const auto bins = static_cast<std::size_t>(std::floor(t_total_s / traj.bin_duration_s * (1.0 + 1e-12)));

  Engine eng = stream_engine(seed, 0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  HiddenState state = initial ? *initial
                              : (uni(eng) < stationary_bright(params) ? HiddenState::bright : HiddenState::dark);
  auto dwell = [&](HiddenState s) {
    const double rate = params.switching_rate(s);
    if (rate <= 0.0) return std::numeric_limits<double>::infinity();
    return std::exponential_distribution<double>(rate)(eng);
  };

  traj.counts.resize(bins);
  std::vector<HiddenState> truth(bins);
  double next_jump = dwell(state);
  const double rate_b = params.lambda_bright / params.t_rep_s;
  const double rate_d = params.lambda_dark / params.t_rep_s;
  for (std::size_t i = 0; i < bins; ++i) {
    const double start = static_cast<double>(i) * traj.bin_duration_s;
    const double end = start + traj.bin_duration_s;
    std::array<double, 2> occupancy{};
    double t = start;
    while (next_jump < end) {
      occupancy[idx(state)] += next_jump - t;
      t = next_jump;
      traj.jump_times_s.push_back(next_jump);
      state = other(state);
      next_jump = t + dwell(state);
    }
    occupancy[idx(state)] += end - t;
    const double ob = occupancy[idx(HiddenState::bright)], od = occupancy[idx(HiddenState::dark)];
    traj.counts[i] = sample_poisson(eng, ob * rate_b + od * rate_d);
    truth[i] = ob > od ? HiddenState::bright : HiddenState::dark;
  }
  traj.true_states = std::move(truth);
  return traj;
}

namespace {

FilterResult forward(const Trajectory &traj, const ReadoutParams &params, const Emissions &em,
                     const TransitionMatrix &t) {
  FilterResult fr;
  fr.filtered.resize(traj.size());
  constexpr auto B = idx(HiddenState::bright);
  constexpr auto D = idx(HiddenState::dark);
  const double pi_b = stationary_bright(params);
  std::array<double, 2> prior{pi_b, 1.0 - pi_b};
  std::array<double, 2> e{};
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (i > 0) {
      const double fb = fr.filtered[i - 1], fd = 1.0 - fb;
      prior = {fb * t.p[B][B] + fd * t.p[D][B], fb * t.p[B][D] + fd * t.p[D][D]};
    }
    const double log_scale = em.scaled(traj.counts[i], e);
    const double ub = prior[B] * e[B], ud = prior[D] * e[D];
    const double c = ub + ud;
    fr.filtered[i] = ub / c;
    fr.log_evidence += std::log(c) + log_scale;
  }
  return fr;
}

long max_count(const Trajectory &traj) { return *std::max_element(traj.counts.begin(), traj.counts.end()); }

}  // namespace

FilterResult hmm_filter(const Trajectory &traj, const ReadoutParams &params) {
  check_consistent(traj, params);
  const Emissions em(params, traj.n_bin, max_count(traj));
  return forward(traj, params, em, bin_transition(params, traj.bin_duration_s));
}

FilterResult hmm_smooth(const Trajectory &traj, const ReadoutParams &params) {
  check_consistent(traj, params);
  const Emissions em(params, traj.n_bin, max_count(traj));
  const TransitionMatrix t = bin_transition(params, traj.bin_duration_s);
  FilterResult fr = forward(traj, params, em, t);
  constexpr auto B = idx(HiddenState::bright);
  constexpr auto D = idx(HiddenState::dark);

  const std::size_t n = traj.size();
  fr.smoothed.resize(n);
  fr.smoothed[n - 1] = fr.filtered[n - 1];
  std::array<double, 2> beta{1.0, 1.0};
  std::array<double, 2> e{};
  for (std::size_t i = n - 1; i-- > 0;) {
    em.scaled(traj.counts[i + 1], e);
    const double wb = e[B] * beta[B], wd = e[D] * beta[D];
    beta = {t.p[B][B] * wb + t.p[B][D] * wd, t.p[D][B] * wb + t.p[D][D] * wd};
    const double norm = beta[B] + beta[D];
    beta[B] /= norm;
    beta[D] /= norm;
    const double sb = fr.filtered[i] * beta[B], sd = (1.0 - fr.filtered[i]) * beta[D];
    fr.smoothed[i] = sb / (sb + sd);
  }
  return fr;
}

std::vector<HiddenState> assign_states(const FilterResult &fr, double p_threshold) {
  const std::vector<double> &post = fr.smoothed.empty() ? fr.filtered : fr.smoothed;
  std::vector<HiddenState> path(post.size());
  for (std::size_t i = 0; i < post.size(); ++i)
    path[i] = post[i] > p_threshold ? HiddenState::bright : HiddenState::dark;
  return path;
}

DwellStats dwell_time_rates(const std::vector<HiddenState> &path, double bin_duration_s) {
  if (!(bin_duration_s > 0.0)) throw InvalidParameter("bin duration must be > 0");
  DwellStats st;
  std::array<double, 2> total_bins{};
  std::size_t run_start = 0;
  for (std::size_t i = 1; i <= path.size(); ++i) {
    if (i < path.size() && path[i] == path[run_start]) continue;
    if (i < path.size()) ++st.jumps;
    const bool censored = run_start == 0 || i == path.size();
    if (!censored) {
      const auto s = idx(path[run_start]);
      total_bins[s] += static_cast<double>(i - run_start);
      ++st.dwell_count[s];
    }
    run_start = i;
  }
  if (st.jumps < 2) throw InsufficientJumps("path has " + std::to_string(st.jumps) + " jumps; need >= 2");
  for (HiddenState s : {HiddenState::bright, HiddenState::dark}) {
    const auto k = idx(s);
    if (st.dwell_count[k] == 0) throw InsufficientJumps("no complete " + to_string(s) + " dwell");
    st.mean_dwell_s[k] = total_bins[k] / static_cast<double>(st.dwell_count[k]) * bin_duration_s;
    st.rate_hz[k] = 1.0 / st.mean_dwell_s[k];
    st.rate_se_hz[k] = st.rate_hz[k] / std::sqrt(static_cast<double>(st.dwell_count[k]));
  }
  return st;
}

}  // namespace repread
