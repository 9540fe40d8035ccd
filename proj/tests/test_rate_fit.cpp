#include <doctest.h>

#include "repread/rate_fit.hpp"

using namespace repread;

namespace {

std::vector<ObservedHistogram> synth(const ReadoutParams &truth, std::uint64_t trials, std::uint64_t seed) {
  std::vector<ObservedHistogram> data;
  for (HiddenState s : {HiddenState::bright, HiddenState::dark})
    data.push_back({simulate_counts(truth, s, trials, {seed + idx(s), 10000, 0}), s, truth.repetitions});
  return data;
}

}  // namespace

TEST_SUITE("rate_fit") {
  TEST_CASE("no-switching data: rates collapse, lambda_b recovered") {
    const ReadoutParams truth{0, 0, 0.02, 0.001, 15e-6, 300};
    const auto data = synth(truth, 50000, 100);
    const ReadoutParams init{10.0, 10.0, 0.015, 0.002, 15e-6, 300};
    const RateFit fit = fit_rates(data, init, {});
    CHECK(fit.estimate.gamma_bright_hz < 1.0);
    CHECK(fit.estimate.gamma_dark_hz < 1.0);
    CHECK(std::abs(fit.estimate.lambda_bright / 0.02 - 1.0) < 0.02);
    CHECK(fit.log_likelihood >= fit.initial_log_likelihood);
  }

  TEST_CASE("mask holds emission means exactly") {
    const ReadoutParams truth{100.0, 8.0, 0.02, 0.001, 15e-6, 300};
    const auto data = synth(truth, 20000, 200);
    const ReadoutParams init{30.0, 30.0, 0.021, 0.0012, 15e-6, 300};
    FitMask mask;
    mask.fix(FitParameter::lambda_bright).fix(FitParameter::lambda_dark);
    const RateFit fit = fit_rates(data, init, mask);
    CHECK(fit.estimate.lambda_bright == init.lambda_bright);
    CHECK(fit.estimate.lambda_dark == init.lambda_dark);
    CHECK(fit.estimate.gamma_bright_hz != init.gamma_bright_hz);
    CHECK(fit.half_width[2] == 0.0);
    CHECK(fit.half_width[3] == 0.0);
    CHECK(fit.log_likelihood >= fit.initial_log_likelihood);
  }

  TEST_CASE("fit reaches at least the likelihood of the generating parameters") {
    const ReadoutParams truth{100.0, 8.0, 0.02, 0.001, 15e-6, 300};
    const auto data = synth(truth, 30000, 250);
    const RateFit fit = fit_rates(data, {30.0, 30.0, 0.015, 0.002, 15e-6, 300}, {});
    CHECK(fit.log_likelihood >= log_likelihood(truth, data) - 0.5);
    for (double hw : fit.half_width) CHECK(hw > 0.0);
  }

  TEST_CASE("likelihood prefers the generating parameters") {
    const ReadoutParams truth{100.0, 8.0, 0.02, 0.001, 15e-6, 250};
    const auto data = synth(truth, 20000, 300);
    ReadoutParams off = truth;
    off.gamma_bright_hz = 300.0;
    CHECK(log_likelihood(truth, data) > log_likelihood(off, data));
  }

  TEST_CASE("evaluation cap raises ConvergenceError with the best point") {
    const ReadoutParams truth{100.0, 8.0, 0.02, 0.001, 15e-6, 100};
    const auto data = synth(truth, 5000, 400);
    FitOptions opts;
    opts.simplex.max_evaluations = 5;
    opts.grid_points_per_decade = 1;
    try {
      fit_rates(data, truth, {}, opts);
      FAIL("expected ConvergenceError");
    } catch (const ConvergenceError &e) {
      CHECK(e.best_so_far().log_likelihood >= e.best_so_far().initial_log_likelihood);
    }
  }

  TEST_CASE("fit needs both initial states") {
    const ReadoutParams truth{100.0, 8.0, 0.02, 0.001, 15e-6, 100};
    auto data = synth(truth, 1000, 500);
    data.pop_back();
    CHECK_THROWS_AS(fit_rates(data, truth, {}), InvalidParameter);
  }
}
