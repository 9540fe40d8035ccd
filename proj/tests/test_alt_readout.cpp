#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "repread/alt_readout.hpp"
#include "repread/error.hpp"
#include "repread/poisson.hpp"

using namespace repread;

namespace {

ReadoutParams calibrated() { return {100.0, 8.0, 0.02, 0.001, 15e-6, 1}; }

}  // namespace

TEST_SUITE("alt_readout") {
  TEST_CASE("Skellam: Poisson limit, convolution oracle, symmetry") {
    for (long k = -3; k <= 12; ++k) CHECK(skellam_pmf(3.2, 0.0, k) == doctest::Approx(poisson_pmf(3.2, k)).epsilon(1e-12));
    CHECK(skellam_pmf(3.2, 0.0, -1) == 0.0);
    double direct = 0.0;
    for (long j = 0; j < 80; ++j) direct += poisson_pmf(2.5, j) * poisson_pmf(2.5, j);
    CHECK(skellam_pmf(2.5, 2.5, 0) == doctest::Approx(direct).epsilon(1e-12));
    std::mt19937_64 eng(21);
    std::uniform_real_distribution<double> mu(0.0, 30.0);
    std::uniform_int_distribution<long> kk(-25, 25);
    for (int i = 0; i < 200; ++i) {
      const double a = mu(eng), b = mu(eng);
      const long k = kk(eng);
      CHECK(skellam_pmf(a, b, k) == doctest::Approx(skellam_pmf(b, a, -k)).epsilon(1e-12));
      CHECK(skellam_pmf(a, b, k) == doctest::Approx(oracle::skellam_convolution(a, b, k)).epsilon(1e-9));
    }
  }

  TEST_CASE("no switching gives an exact Skellam, mirrored for down") {
    const AltReadoutParams p{{0, 0, 0.02, 0.001, 15e-6, 1}, 150};
    const DiffPmf up = diff_distribution(p, HiddenState::bright);
    const DiffPmf down = diff_distribution(p, HiddenState::dark);
    for (long k = -20; k <= 20; ++k) {
      CHECK(std::abs(up[k] - skellam_pmf(3.0, 0.15, k)) < 1e-10);
      CHECK(std::abs(down[k] - skellam_pmf(0.15, 3.0, k)) < 1e-10);
    }
  }

  TEST_CASE("DP agrees with path enumeration") {
    const ReadoutParams base{400.0, 150.0, 0.5, 0.05, 1e-3, 1};
    for (HiddenState s0 : {HiddenState::bright, HiddenState::dark}) {
      const DiffPmf dp = diff_distribution({base, 6}, s0, 30);
      const DiscretePmf ref = oracle::enumerate_diff(base, 6, s0, 30);
      for (long k = -30; k <= 30; ++k) CHECK(std::abs(dp[k] - ref[k]) < 1e-10);
    }
  }

  TEST_CASE("normalization, symmetric support and mirror symmetry") {
    const AltReadoutParams p{calibrated(), 100};
    const DiffPmf up = diff_distribution(p, HiddenState::bright);
    const DiffPmf down = diff_distribution(p, HiddenState::dark);
    CHECK(up.marginal.sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(up.marginal.min_value() == -up.marginal.max_value());

    // The fixed up-then-down slot order breaks exact mirroring once states switch.
    DiscretePmf mirrored{-down.k_max(), std::vector<double>(down.marginal.p.rbegin(), down.marginal.p.rend())};
    CHECK(total_variation(up.marginal, mirrored) < 0.02);

    const AltReadoutParams still{{0, 0, 0.03, 0.004, 15e-6, 1}, 100};
    const DiffPmf su = diff_distribution(still, HiddenState::bright);
    const DiffPmf sd = diff_distribution(still, HiddenState::dark);
    for (long k = -su.k_max(); k <= su.k_max(); ++k) CHECK(std::abs(su[k] - sd[-k]) < 1e-14);
  }

  TEST_CASE("Monte Carlo agrees with the DP") {
    const AltReadoutParams p{calibrated(), 150};
    for (HiddenState s0 : {HiddenState::bright, HiddenState::dark}) {
      const Histogram h = simulate_alt(p, s0, 200000, {31, 10000, 0});
      CHECK(h.trials() == 200000);
      CHECK(total_variation(h.normalized(), diff_distribution(p, s0).marginal) < 0.01);
    }
  }

  TEST_CASE("widening the inconclusive band trades eta for fidelity") {
    const AltReadoutParams p{calibrated(), 100};
    FidelityPoint prev = alt_fidelity(p, {0, 1});
    CHECK(prev.eta == doctest::Approx(1.0));
    for (long w = 1; w <= 8; ++w) {
      const FidelityPoint cur = alt_fidelity(p, {-w, w});
      CHECK(cur.eta <= prev.eta + 1e-12);
      CHECK(cur.f_avg >= prev.f_avg - 1e-12);
      prev = cur;
    }
  }

  TEST_CASE("perfectly separable proxy") {
    const AltReadoutParams p{{0, 0, 0.5, 0.0, 15e-6, 1}, 100};  // 50 photons per state
    const FidelityPoint fp = alt_fidelity(p, {0, 1});
    CHECK(fp.eta == 1.0);
    CHECK(fp.f_avg > 0.9999);
  }

  TEST_CASE("policy grid shape") {
    const auto grid = alt_policy_grid(3);
    for (const ThresholdPolicy &pol : grid) {
      CHECK(pol.dark_max >= -3);
      CHECK(pol.bright_min > pol.dark_max);
      CHECK(pol.bright_min <= 3);
    }
    CHECK(grid.size() == 21);
  }

  TEST_CASE("two-point conditioning") {
    const AltReadoutParams p{calibrated(), 50};
    AltTwoPointSpec spec;
    spec.prepare = HiddenState::bright;
    const TwoPointResult up = alt_two_point_histogram(p, spec, 50000, {41, 10000, 0});
    spec.prepare = HiddenState::dark;
    const TwoPointResult down = alt_two_point_histogram(p, spec, 50000, {42, 10000, 0});
    CHECK(up.r2.mean() > 0.5);
    CHECK(down.r2.mean() < -0.5);
    CHECK(up.r2.meta.repetitions == 50);
    spec.threshold = 500;
    CHECK_THROWS_AS(alt_two_point_histogram(p, spec, 20000, {43, 10000, 0}), InsufficientStatistics);
  }

  TEST_CASE("effective rate refit from synthetic data") {
    const AltReadoutParams p{calibrated(), 150};
    std::vector<ObservedDiffHistogram> data;
    for (HiddenState s0 : {HiddenState::bright, HiddenState::dark})
      data.push_back({simulate_alt(p, s0, 100000, {50 + idx(s0), 10000, 0}), s0, 150});
    const AltRateFit fit = fit_alt_rates(data, calibrated(), 20.0, 20.0);
    // Addressed state leaves at gamma_b, the other at gamma_d: mean (100 + 8) / 2.
    CHECK(fit.gamma_up_hz == doctest::Approx(54.0).epsilon(0.15));
    CHECK(fit.gamma_down_hz == doctest::Approx(54.0).epsilon(0.15));
    CHECK(fit.converged);
  }
}
