#pragma once

#include <optional>
#include <vector>

#include "repread/spin_model.hpp"

namespace repread {

struct BathSpin {
  NuclearSpecies species = NuclearSpecies::si29;
  double azz_khz = 0.0;
  double amplitude = 0.5;  // relative peak height
  double t_rf_s = 0.5e-3;  // RF pi-pulse duration, sets the linewidth

  double linewidth_khz() const { return 0.8 / t_rf_s * 1e-3; }  // FWHM
};

struct Peak {
  double center_khz = 0.0;
  double width_khz = 0.0;  // FWHM
  double depth = 0.0;      // height above the local base
};

struct Spectrum {
  std::vector<double> f_khz;
  std::vector<double> contrast;
  std::vector<Peak> peaks;
};

struct EndorOptions {
  double baseline = 0.0;
  GyromagneticTable gyromagnetic;
  double min_prominence = 0.1;  // for the peak list attached to the spectrum
};

/// Baseline plus a sinc^2 line at f_L +- A_zz/2 for every bath spin, summed
/// and clamped to [0, 1].
Spectrum endor_spectrum(const std::vector<BathSpin> &bath, double b_z, const std::vector<double> &f_grid_khz,
                        const EndorOptions &opts = {});

/// Evenly spaced grid including both ends.
std::vector<double> linear_grid(double lo, double hi, std::size_t points);

/// Local maxima with prominence >= min_prominence. Centers are refined by a
/// parabola through the three top samples; widths are interpolated at half
/// prominence.
std::vector<Peak> find_peaks(const std::vector<double> &f_khz, const std::vector<double> &y, double min_prominence);

struct PeakAssignment {
  std::vector<double> peaks_khz;          // one (single) or two (pair)
  std::optional<NuclearSpecies> species;  // empty: unassigned
  double azz_khz = 0.0;                   // pair separation, or twice the offset for singles
  bool low_confidence = false;
};

struct MatchOptions {
  double tolerance_khz = 1.0;        // allowed asymmetry of a pair about f_L
  double single_window_khz = 100.0;  // max |f - f_L| for a single to be assigned
  GyromagneticTable gyromagnetic;
};

/// Greedy symmetric pairing about each species' Larmor frequency, most
/// symmetric pairs first. Leftover peaks go to the nearest Larmor line with a
/// low-confidence flag, or stay unassigned outside the single window.
std::vector<PeakAssignment> match_peaks(const std::vector<double> &peaks_khz, double b_z,
                                        const MatchOptions &opts = {});

}  // namespace repread
