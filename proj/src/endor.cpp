#include "repread/endor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "repread/error.hpp"

namespace repread {

namespace {

constexpr double kSincHalfMax = 0.88588;  // FWHM of sinc^2(x) in units of x

double sinc2(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double s = std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
  return s * s;
}

double larmor_khz(NuclearSpecies s, double b_z, const GyromagneticTable &table) {
  return larmor_frequency(s, b_z, table) * 1e3;
}

}  // namespace

std::vector<double> linear_grid(double lo, double hi, std::size_t points) {
  if (points < 2 || !(hi > lo)) throw InvalidParameter("grid needs >= 2 points and hi > lo");
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / (points - 1);
  return g;
}

Spectrum endor_spectrum(const std::vector<BathSpin> &bath, double b_z, const std::vector<double> &f_grid_khz,
                        const EndorOptions &opts) {
  if (f_grid_khz.empty()) throw InvalidParameter("frequency grid is empty");
  Spectrum sp;
  sp.f_khz = f_grid_khz;
  sp.contrast.assign(f_grid_khz.size(), opts.baseline);
  for (const BathSpin &spin : bath) {
    if (!(spin.t_rf_s > 0.0)) throw InvalidParameter("T_rf must be > 0");
    const double fl = larmor_khz(spin.species, b_z, opts.gyromagnetic);
    const double scale = kSincHalfMax / spin.linewidth_khz();
    for (double center : {fl - spin.azz_khz / 2.0, fl + spin.azz_khz / 2.0})
      for (std::size_t i = 0; i < f_grid_khz.size(); ++i)
        sp.contrast[i] += spin.amplitude * sinc2((f_grid_khz[i] - center) * scale);
  }
  for (double &c : sp.contrast) c = std::clamp(c, 0.0, 1.0);
  sp.peaks = find_peaks(sp.f_khz, sp.contrast, opts.min_prominence);
  return sp;
}

std::vector<Peak> find_peaks(const std::vector<double> &f, const std::vector<double> &y, double min_prominence) {
  if (f.size() != y.size()) throw InvalidParameter("frequency and value lengths differ");
  std::vector<Peak> peaks;
  const std::size_t n = y.size();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(y[i] > y[i - 1] && y[i] >= y[i + 1])) continue;
    // Walk out until a higher sample, tracking the lowest point on each side.
    double left_min = y[i], right_min = y[i];
    for (std::size_t j = i; j-- > 0;) {
      if (y[j] > y[i]) break;
      left_min = std::min(left_min, y[j]);
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      if (y[j] > y[i]) break;
      right_min = std::min(right_min, y[j]);
    }
    const double base = std::max(left_min, right_min);
    const double prominence = y[i] - base;
    if (prominence < min_prominence) continue;

    Peak p;
    const double denom = y[i - 1] - 2.0 * y[i] + y[i + 1];
    const double shift = denom != 0.0 ? 0.5 * (y[i - 1] - y[i + 1]) / denom : 0.0;
    p.center_khz = f[i] + shift * (f[i + 1] - f[i - 1]) / 2.0;
    p.depth = prominence;

    const double half = base + prominence / 2.0;
    auto crossing = [&](std::size_t a, std::size_t b) {
      return f[a] + (half - y[a]) * (f[b] - f[a]) / (y[b] - y[a]);
    };
    std::size_t l = i, r = i;
    while (l > 0 && y[l] > half) --l;
    while (r + 1 < n && y[r] > half) ++r;
    const double left = y[l] <= half ? crossing(l, l + 1) : f[l];
    const double right = y[r] <= half ? crossing(r - 1, r) : f[r];
    p.width_khz = right - left;
    peaks.push_back(p);
  }
  return peaks;
}

std::vector<PeakAssignment> match_peaks(const std::vector<double> &peaks_khz, double b_z, const MatchOptions &opts) {
  if (!(opts.tolerance_khz > 0.0)) throw InvalidParameter("tolerance must be > 0");
  const std::array<NuclearSpecies, 2> species{NuclearSpecies::si29, NuclearSpecies::c13};
  std::array<double, 2> fl{};
  for (std::size_t s = 0; s < 2; ++s) fl[s] = larmor_khz(species[s], b_z, opts.gyromagnetic);

  struct Candidate {
    double asymmetry;
    std::size_t i, j, s;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < peaks_khz.size(); ++i)
    for (std::size_t j = i + 1; j < peaks_khz.size(); ++j)
      for (std::size_t s = 0; s < 2; ++s) {
        const double asym = std::abs(0.5 * (peaks_khz[i] + peaks_khz[j]) - fl[s]);
        if (asym <= opts.tolerance_khz) candidates.push_back({asym, i, j, s});
      }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate &a, const Candidate &b) { return a.asymmetry < b.asymmetry; });

  std::vector<bool> used(peaks_khz.size(), false);
  std::vector<PeakAssignment> out;
  for (const Candidate &c : candidates) {
    if (used[c.i] || used[c.j]) continue;
    used[c.i] = used[c.j] = true;
    PeakAssignment a;
    a.peaks_khz = {std::min(peaks_khz[c.i], peaks_khz[c.j]), std::max(peaks_khz[c.i], peaks_khz[c.j])};
    a.species = species[c.s];
    a.azz_khz = a.peaks_khz[1] - a.peaks_khz[0];
    out.push_back(a);
  }
  for (std::size_t i = 0; i < peaks_khz.size(); ++i) {
    if (used[i]) continue;
    PeakAssignment a;
    a.peaks_khz = {peaks_khz[i]};
    const std::size_t s = std::abs(peaks_khz[i] - fl[0]) <= std::abs(peaks_khz[i] - fl[1]) ? 0 : 1;
    const double offset = std::abs(peaks_khz[i] - fl[s]);
    if (offset <= opts.single_window_khz) {
      a.species = species[s];
      a.azz_khz = 2.0 * offset;
      a.low_confidence = true;
    }
    out.push_back(a);
  }
  return out;
}

}  // namespace repread
