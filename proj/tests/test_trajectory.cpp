#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "repread/error.hpp"
#include "repread/rate_fit.hpp"
#include "repread/trajectory.hpp"

using namespace repread;

namespace {

ReadoutParams calibrated() { return {100.0, 8.0, 0.02, 0.001, 15e-6, 1}; }

ReadoutParams per_bin(ReadoutParams p, long n_bin) {
  p.repetitions = n_bin;
  return p;
}

double error_rate(const std::vector<HiddenState> &path, const std::vector<HiddenState> &truth) {
  long wrong = 0;
  for (std::size_t i = 0; i < path.size(); ++i) wrong += path[i] != truth[i];
  return static_cast<double>(wrong) / static_cast<double>(path.size());
}

long count_jumps(const std::vector<HiddenState> &path) {
  long j = 0;
  for (std::size_t i = 1; i < path.size(); ++i) j += path[i] != path[i - 1];
  return j;
}

}  // namespace

TEST_SUITE("trajectory") {
  TEST_CASE("no switching: Poisson bins and no jumps") {
    const ReadoutParams p{0, 0, 0.02, 0.001, 15e-6, 1};
    const Trajectory t = simulate_trajectory(p, 2.0, 100, 5, HiddenState::bright);
    CHECK(t.jump_times_s.empty());
    CHECK(t.size() == static_cast<std::size_t>(std::llround(2.0 / (100 * 15e-6))));
    double mean = 0.0;
    for (long c : t.counts) mean += static_cast<double>(c);
    mean /= static_cast<double>(t.size());
    CHECK(std::abs(mean - 2.0) < 4.0 * std::sqrt(2.0 / static_cast<double>(t.size())));
    for (HiddenState s : *t.true_states) CHECK(s == HiddenState::bright);
  }

  TEST_CASE("bright dwell times are exponential at 1/gamma_b") {
    const Trajectory t = simulate_trajectory(calibrated(), 150.0, 100, 17, HiddenState::bright);
    // Starting bright, complete bright dwells run from each odd jump to the next.
    std::vector<double> dwells;
    for (std::size_t i = 1; i + 1 < t.jump_times_s.size(); i += 2) dwells.push_back(t.jump_times_s[i + 1] - t.jump_times_s[i]);
    REQUIRE(dwells.size() >= 1000);
    double mean = 0.0;
    for (double d : dwells) mean += d;
    mean /= static_cast<double>(dwells.size());
    CHECK(mean == doctest::Approx(0.01).epsilon(0.2));
    std::sort(dwells.begin(), dwells.end());
    double ks = 0.0;
    const double n = static_cast<double>(dwells.size());
    for (std::size_t i = 0; i < dwells.size(); ++i) {
      const double cdf = 1.0 - std::exp(-100.0 * dwells[i]);
      ks = std::max({ks, std::abs(cdf - i / n), std::abs(cdf - (i + 1) / n)});
    }
    CHECK(ks < 1.63 / std::sqrt(n));  // 1% KS critical value
  }

  TEST_CASE("mean bright dwell over 500+ jumps at N_bin = 100") {
    // About 15 jumps per second at these rates.
    const Trajectory t = simulate_trajectory(calibrated(), 40.0, 100, 18);
    REQUIRE(t.jump_times_s.size() >= 500);
    const HiddenState first = (*t.true_states)[0];
    // Jump i ends a bright dwell when the state before it was bright.
    double total = 0.0;
    long count = 0;
    for (std::size_t i = 1; i < t.jump_times_s.size(); ++i) {
      const bool was_bright = (i % 2 == 0) == (first == HiddenState::bright);
      if (!was_bright) continue;
      total += t.jump_times_s[i] - t.jump_times_s[i - 1];
      ++count;
    }
    CHECK(total / static_cast<double>(count) == doctest::Approx(0.01).epsilon(0.2));
  }

  TEST_CASE("doubling N_bin keeps the integrated photon count") {
    const Trajectory a = simulate_trajectory(calibrated(), 20.0, 100, 23);
    const Trajectory b = simulate_trajectory(calibrated(), 20.0, 200, 24);
    CHECK(b.size() == a.size() / 2);
    double sa = 0, sb = 0;
    for (long c : a.counts) sa += static_cast<double>(c);
    for (long c : b.counts) sb += static_cast<double>(c);
    // Telegraph fluctuations dominate the spread; stationary mean ~ 1/(1 + 12.5) bright.
    const double expect = 20.0 / 15e-6 * (0.02 * 8.0 / 108.0 + 0.001 * 100.0 / 108.0);
    CHECK(std::abs(sa - expect) / expect < 0.15);
    CHECK(std::abs(sb - expect) / expect < 0.15);
  }

  TEST_CASE("filter evidence equals brute-force path enumeration") {
    std::mt19937_64 eng(77);
    std::uniform_real_distribution<double> rate(1.0, 2000.0), lam(0.001, 0.2);
    for (int draw = 0; draw < 10; ++draw) {
      ReadoutParams p{rate(eng), rate(eng), lam(eng), lam(eng), 15e-6, 1};
      if (p.lambda_bright < p.lambda_dark) std::swap(p.lambda_bright, p.lambda_dark);
      const Trajectory t = simulate_trajectory(p, 12 * 20 * 15e-6, 20, 100 + draw);
      REQUIRE(t.size() == 12);
      const double lib = hmm_filter(t, per_bin(p, 20)).log_evidence;
      const double ref = oracle::brute_log_evidence(t, per_bin(p, 20));
      CHECK(std::abs(lib - ref) <= 1e-9 * std::abs(ref));
    }
  }

  TEST_CASE("uninformative emissions return the stationary prior") {
    const ReadoutParams p{100.0, 8.0, 0.01, 0.01, 15e-6, 1};
    const Trajectory t = simulate_trajectory(p, 0.5, 100, 9);
    const FilterResult fr = hmm_smooth(t, per_bin(p, 100));
    const double prior = 8.0 / 108.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      CHECK(fr.filtered[i] == doctest::Approx(prior).epsilon(1e-9));
      CHECK(fr.smoothed[i] == doctest::Approx(prior).epsilon(1e-9));
    }
  }

  TEST_CASE("smoothing: posteriors bounded, final bin matches, fewer errors") {
    const ReadoutParams p = calibrated();
    const Trajectory t = simulate_trajectory(p, 10.0, 100, 31);
    const FilterResult fr = hmm_smooth(t, per_bin(p, 100));
    for (std::size_t i = 0; i < t.size(); ++i) {
      CHECK(fr.filtered[i] >= 0.0);
      CHECK(fr.filtered[i] <= 1.0);
      CHECK(fr.smoothed[i] >= 0.0);
      CHECK(fr.smoothed[i] <= 1.0);
    }
    CHECK(std::isfinite(fr.log_evidence));
    CHECK(fr.smoothed.back() == doctest::Approx(fr.filtered.back()).epsilon(1e-12));
    FilterResult filter_only = fr;
    filter_only.smoothed.clear();
    const double e_filt = error_rate(assign_states(filter_only), *t.true_states);
    const auto smooth_path = assign_states(fr);
    const double e_smooth = error_rate(smooth_path, *t.true_states);
    CHECK(e_smooth <= e_filt);
    CHECK(e_smooth < 0.02);
    const long true_jumps = count_jumps(*t.true_states);
    CHECK(std::abs(count_jumps(smooth_path) - true_jumps) <= 0.3 * true_jumps);
  }

  TEST_CASE("true rates beat rates perturbed tenfold") {
    const ReadoutParams p = calibrated();
    const Trajectory t = simulate_trajectory(p, 5.0, 100, 41);
    const double truth = hmm_filter(t, per_bin(p, 100)).log_evidence;
    for (double f : {0.1, 10.0}) {
      ReadoutParams q = per_bin(p, 100);
      q.gamma_bright_hz *= f;
      q.gamma_dark_hz *= f;
      CHECK(truth >= hmm_filter(t, q).log_evidence);
    }
  }

  TEST_CASE("single bin: smoothing equals filtering") {
    Trajectory t;
    t.bin_duration_s = 100 * 15e-6;
    t.n_bin = 100;
    t.counts = {3};
    const FilterResult fr = hmm_smooth(t, per_bin(calibrated(), 100));
    CHECK(fr.smoothed[0] == doctest::Approx(fr.filtered[0]).epsilon(1e-14));
  }

  TEST_CASE("bin duration must match N_bin * t_rep") {
    const Trajectory t = simulate_trajectory(calibrated(), 0.1, 100, 3);
    ReadoutParams other = calibrated();
    other.t_rep_s = 17e-6;
    CHECK_THROWS_AS(hmm_filter(t, other), ValidationError);
  }

  TEST_CASE("state assignment thresholds") {
    FilterResult fr;
    fr.filtered = {1.0, 1.0, 1.0};
    for (HiddenState s : assign_states(fr)) CHECK(s == HiddenState::bright);
    fr.filtered = {0.1, 0.7, 0.45, 0.9, 0.2};
    CHECK(assign_states(fr, 0.5) == assign_states(fr, 0.5 + 1e-6));
  }

  TEST_CASE("dwell rates on constructed paths") {
    const long k = 7;
    const double dt = 1.5e-3;
    std::vector<HiddenState> path;
    for (int block = 0; block < 20; ++block)
      for (long i = 0; i < k; ++i) path.push_back(block % 2 ? HiddenState::dark : HiddenState::bright);
    const DwellStats d = dwell_time_rates(path, dt);
    CHECK(d.rate_hz[0] == doctest::Approx(1.0 / (k * dt)).epsilon(1e-12));
    CHECK(d.rate_hz[1] == doctest::Approx(1.0 / (k * dt)).epsilon(1e-12));
    CHECK(d.jumps == 19);
    CHECK_THROWS_AS(dwell_time_rates(std::vector<HiddenState>(50, HiddenState::dark), dt), InsufficientJumps);
  }

  TEST_CASE("trajectory validation") {
    Trajectory t;
    t.bin_duration_s = 1e-3;
    t.counts = {1, -1};
    CHECK_THROWS(t.validate());
  }
}

TEST_SUITE("trajectory_loop") {
  TEST_CASE("histogram fit and dwell rates agree within 25%") {
    const ReadoutParams p = calibrated();
    std::vector<ObservedHistogram> data;
    for (HiddenState s : {HiddenState::bright, HiddenState::dark})
      data.push_back({simulate_counts(p.with_repetitions(250), s, 100000, {60 + idx(s), 10000, 0}), s, 250});
    const RateFit fit = fit_rates(data, {30.0, 30.0, 0.015, 0.002, p.t_rep_s, 250}, {});

    const Trajectory t = simulate_trajectory(p, 2000.0, 100, 61);
    const FilterResult fr = hmm_smooth(t, per_bin(p, 100));
    const DwellStats d = dwell_time_rates(assign_states(fr), t.bin_duration_s);
    const double fitted[2] = {fit.estimate.gamma_bright_hz, fit.estimate.gamma_dark_hz};
    for (std::size_t s = 0; s < 2; ++s) {
      INFO("state " << s << ": fit " << fitted[s] << " Hz, dwell " << d.rate_hz[s] << " Hz");
      CHECK(std::abs(d.rate_hz[s] / fitted[s] - 1.0) <= 0.25);
    }
  }
}
