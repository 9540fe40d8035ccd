#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "repread/dynamics.hpp"
#include "repread/endor.hpp"
#include "repread/error.hpp"

using namespace repread;

namespace {

constexpr double kField = 0.14;

std::vector<double> grid(double stop_s, std::size_t points) { return linear_grid(0.0, stop_s, points); }

}  // namespace

TEST_SUITE("dynamics") {
  TEST_CASE("Rabi endpoints") {
    RabiConfig cfg;
    cfg.rabi_frequency_khz = 2.0;
    cfg.contrast = {0.97, 0.95};
    cfg.durations_s = {0.0, 1.0 / (2.0 * 2e3)};
    const auto s = rabi_signal(cfg);
    CHECK(s[0] == cfg.contrast.dark_endpoint());
    CHECK(s[1] == doctest::Approx(cfg.contrast.bright_endpoint()).epsilon(1e-12));
    CHECK(cfg.contrast.dark_endpoint() == doctest::Approx(0.03));
    CHECK(cfg.contrast.bright_endpoint() == doctest::Approx(0.95));
  }

  TEST_CASE("contrast from a fidelity point") {
    FidelityPoint fp;
    fp.f_dark = 0.97;
    fp.f_bright = 0.95;
    fp.f_avg = 0.96;
    const ContrastMap m = ContrastMap::from(fp);
    CHECK(m.bright_endpoint() - m.dark_endpoint() == doctest::Approx(2.0 * fp.f_avg - 1.0).epsilon(1e-12));
    CHECK(ContrastMap{}.apply(0.3) == 0.3);
    CHECK_THROWS_AS((ContrastMap{1.2, 0.9}.validate()), InvalidParameter);
  }

  TEST_CASE("Ramsey: t = 0 is maximal, beat nodes, envelope decay") {
    RamseyConfig cfg;
    cfg.contrast = {0.98, 0.96};
    for (double det : {0.3, 1.0, 2.7}) {
      cfg.detuning_khz = det;
      cfg.durations_s = {0.0};
      CHECK(ramsey_signal(cfg)[0] == doctest::Approx(cfg.contrast.bright_endpoint()).epsilon(1e-14));
    }
    cfg.beat_splitting_khz = 0.2;
    for (int m = 0; m < 3; ++m) {
      const double t = (2.0 * m + 1.0) / (2.0 * 0.2e3);
      CHECK(std::abs(ramsey_envelope(cfg, t)) < 1e-12);
    }
    cfg.beat_splitting_khz.reset();
    double prev = 2.0;
    for (double t : grid(30e-3, 301)) {
      const double e = ramsey_envelope(cfg, t);
      CHECK(e <= prev);
      prev = e;
    }
  }

  TEST_CASE("invalid dynamics parameters") {
    RamseyConfig cfg;
    cfg.decay_exponent = 4.0;
    CHECK_THROWS_AS(ramsey_signal(cfg), InvalidParameter);
    RabiConfig r;
    r.rabi_frequency_khz = 0.0;
    CHECK_THROWS_AS(rabi_signal(r), InvalidParameter);
    r.rabi_frequency_khz = 1.0;
    r.durations_s = {-1e-3};
    CHECK_THROWS_AS(rabi_signal(r), InvalidParameter);
  }

  TEST_CASE("shot noise sampling is deterministic and unbiased") {
    const std::vector<double> p(200, 0.3);
    const auto a = sample_signal(p, 1000, 8);
    CHECK(a == sample_signal(p, 1000, 8));
    double mean = 0.0;
    for (double v : a) mean += v;
    mean /= 200.0;
    CHECK(std::abs(mean - 0.3) < 4.0 * std::sqrt(0.21 / 2e5));
  }

  TEST_CASE("Ramsey refit recovers detuning and T2*") {
    RamseyConfig cfg;
    cfg.detuning_khz = 1.0;
    cfg.t2_star_s = 7.4e-3;
    cfg.durations_s = grid(20e-3, 401);
    const auto sig = ramsey_signal(cfg);
    const RamseyFit fit = fit_ramsey(cfg.durations_s, sig, cfg);
    CHECK(fit.t2_star_s == doctest::Approx(7.4e-3).epsilon(0.05));
    CHECK(fit.detuning_khz == doctest::Approx(1.0).epsilon(0.01));
  }
}

TEST_SUITE("endor") {
  TEST_CASE("empty bath is a flat baseline") {
    EndorOptions opts;
    opts.baseline = 0.1;
    const Spectrum sp = endor_spectrum({}, kField, linear_grid(1100, 1600, 501), opts);
    for (double c : sp.contrast) CHECK(c == 0.1);
    CHECK(sp.peaks.empty());
  }

  TEST_CASE("single 29Si spin gives a symmetric pair about the Larmor line") {
    const double fl = larmor_frequency(NuclearSpecies::si29, kField) * 1e3;
    CHECK(fl == doctest::Approx(1185.1).epsilon(1e-4));
    const Spectrum sp = endor_spectrum({{NuclearSpecies::si29, 50.0}}, kField, linear_grid(1100, 1300, 20001));
    REQUIRE(sp.peaks.size() == 2);
    CHECK(sp.peaks[1].center_khz - sp.peaks[0].center_khz == doctest::Approx(50.0).epsilon(1e-3));
    CHECK(0.5 * (sp.peaks[0].center_khz + sp.peaks[1].center_khz) == doctest::Approx(fl).epsilon(1e-6));
    CHECK(sp.peaks[0].width_khz == doctest::Approx(BathSpin{}.linewidth_khz()).epsilon(0.02));
  }

  TEST_CASE("spectrum is invariant under bath permutation and clamped") {
    std::vector<BathSpin> bath{{NuclearSpecies::si29, 20.0, 0.7},
                               {NuclearSpecies::c13, 40.0, 0.6},
                               {NuclearSpecies::si29, 20.5, 0.8}};
    const auto f = linear_grid(1100, 1600, 5001);
    const Spectrum a = endor_spectrum(bath, kField, f);
    std::reverse(bath.begin(), bath.end());
    const Spectrum b = endor_spectrum(bath, kField, f);
    for (std::size_t i = 0; i < f.size(); ++i) {
      CHECK(a.contrast[i] == doctest::Approx(b.contrast[i]).epsilon(1e-14));
      CHECK(a.contrast[i] <= 1.0);
      CHECK(a.contrast[i] >= 0.0);
    }
  }

  TEST_CASE("peak finder on a known curve") {
    const auto f = linear_grid(0, 100, 1001);
    std::vector<double> y(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) y[i] = std::exp(-0.5 * std::pow((f[i] - 40.03) / 2.0, 2));
    const auto peaks = find_peaks(f, y, 0.1);
    REQUIRE(peaks.size() == 1);
    CHECK(peaks[0].center_khz == doctest::Approx(40.03).epsilon(1e-4));
    CHECK(peaks[0].width_khz == doctest::Approx(2.0 * std::sqrt(2.0 * std::log(2.0)) * 2.0).epsilon(1e-3));
  }

  TEST_CASE("matching: constructed pair, stray single") {
    const double fl = larmor_frequency(NuclearSpecies::si29, kField) * 1e3;
    const auto pair = match_peaks({fl - 25.0, fl + 25.0}, kField);
    REQUIRE(pair.size() == 1);
    CHECK(pair[0].species == NuclearSpecies::si29);
    CHECK(pair[0].azz_khz == doctest::Approx(50.0).epsilon(1e-9));
    CHECK_FALSE(pair[0].low_confidence);

    const auto stray = match_peaks({fl - 25.0, fl + 25.0, 3000.0}, kField);
    REQUIRE(stray.size() == 2);
    bool unassigned = false;
    for (const PeakAssignment &a : stray)
      if (a.peaks_khz.size() == 1 && a.peaks_khz[0] == 3000.0) unassigned = !a.species.has_value();
    CHECK(unassigned);
  }

  TEST_CASE("round trip from a generated spectrum") {
    std::mt19937_64 eng(5);
    std::uniform_real_distribution<double> azz(10.0, 100.0);
    for (int rep = 0; rep < 5; ++rep) {
      std::vector<BathSpin> bath;
      std::vector<double> si, c;
      // Couplings spaced at least three linewidths apart within each species.
      while (si.size() < 3) {
        const double a = azz(eng);
        if (std::all_of(si.begin(), si.end(), [&](double x) { return std::abs(x - a) > 5.0; })) si.push_back(a);
      }
      while (c.size() < 2) {
        const double a = azz(eng);
        if (std::all_of(c.begin(), c.end(), [&](double x) { return std::abs(x - a) > 5.0; })) c.push_back(a);
      }
      for (double a : si) bath.push_back({NuclearSpecies::si29, a});
      for (double a : c) bath.push_back({NuclearSpecies::c13, a});
      const Spectrum sp = endor_spectrum(bath, kField, linear_grid(1100, 1600, 10001));
      std::vector<double> centers;
      for (const Peak &p : sp.peaks) centers.push_back(p.center_khz);
      const auto out = match_peaks(centers, kField);
      long pairs = 0;
      for (const PeakAssignment &a : out) {
        if (a.peaks_khz.size() != 2) continue;
        ++pairs;
        const auto &truth = *a.species == NuclearSpecies::si29 ? si : c;
        const double nearest = *std::min_element(truth.begin(), truth.end(), [&](double x, double y) {
          return std::abs(x - a.azz_khz) < std::abs(y - a.azz_khz);
        });
        CHECK(std::abs(nearest - a.azz_khz) < 0.5 * BathSpin{}.linewidth_khz());
      }
      CHECK(pairs == 5);
    }
  }
}
