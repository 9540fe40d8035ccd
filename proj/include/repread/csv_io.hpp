#pragma once

#include <string>
#include <utility>
#include <vector>

#include "repread/endor.hpp"
#include "repread/fidelity.hpp"
#include "repread/histogram.hpp"
#include "repread/spin_model.hpp"
#include "repread/trajectory.hpp"

namespace repread {

// Tabular outputs. Every file starts with a header row; readers check it and
// report malformed rows as ValidationError("<path>:<line>", ...).

/// `n,count` (value_name "n") or `k,count` for signed outcomes.
void write_histogram(const std::string &path, const Histogram &h, const std::string &value_name = "n");
/// Accepts either header. Counts must be non-negative integers; "n" values
/// must be non-negative.
Histogram read_histogram(const std::string &path);

/// `bin_index,count[,true_state]` with true_state 1 = bright, 0 = dark.
void write_trajectory(const std::string &path, const Trajectory &traj);
/// Bins must be contiguous from 0. Bin duration and N_bin come from the caller.
Trajectory read_trajectory(const std::string &path, double bin_duration_s, long n_bin);

/// `bin_index,p_bright_filtered,p_bright_smoothed`
void write_filter_result(const std::string &path, const FilterResult &fr);

/// `index,energy_MHz,label_ms,label_mI,overlap`
void write_levels(const std::string &path, const EnergyLevels &levels);

/// `N,n_dark_max,n_bright_min,F_dark,F_bright,F_avg,eta`
void write_fidelity_points(const std::string &path, const std::vector<FidelityPoint> &points);

/// `<value_name>,prob`
void write_pmf(const std::string &path, const DiscretePmf &pmf, const std::string &value_name = "k");

/// `f_kHz,contrast`
void write_spectrum(const std::string &path, const Spectrum &sp);

/// `center_kHz,width_kHz,depth`
void write_peaks(const std::string &path, const std::vector<Peak> &peaks);
/// Reads the first column of a CSV with a `center_kHz` or `f_kHz` header.
std::vector<double> read_peak_centers(const std::string &path);

/// `peak_kHz,partner_kHz,species,Azz_kHz,low_confidence`; partner empty for
/// singles, species empty when unassigned.
void write_assignments(const std::string &path, const std::vector<PeakAssignment> &assignments);

/// Two-column `<x_name>,<y_name>` table.
void write_series(const std::string &path, const std::string &x_name, const std::string &y_name,
                  const std::vector<double> &x, const std::vector<double> &y);
std::pair<std::vector<double>, std::vector<double>> read_series(const std::string &path, const std::string &x_name,
                                                                const std::string &y_name);

}  // namespace repread
