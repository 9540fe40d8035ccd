#include "repread/dynamics.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "repread/error.hpp"
#include "repread/optimize.hpp"
#include "repread/random.hpp"

namespace repread {

namespace {

constexpr double kPi = std::numbers::pi;

void check_durations(const std::vector<double> &durations) {
  for (double t : durations)
    if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidParameter("durations must be finite and >= 0");
}

}  // namespace

void ContrastMap::validate() const {
  if (!(f_dark >= 0.0 && f_dark <= 1.0) || !(f_bright >= 0.0 && f_bright <= 1.0))
    throw InvalidParameter("contrast fidelities must lie in [0, 1]");
}

void RabiConfig::validate() const {
  if (!(rabi_frequency_khz > 0.0) || !std::isfinite(rabi_frequency_khz))
    throw InvalidParameter("rabi_frequency must be > 0");
  check_durations(durations_s);
  contrast.validate();
}

std::vector<double> rabi_signal(const RabiConfig &cfg) {
  cfg.validate();
  const double f_hz = cfg.rabi_frequency_khz * 1e3;
  std::vector<double> out;
  out.reserve(cfg.durations_s.size());
  for (double t : cfg.durations_s) {
    const double s = std::sin(kPi * f_hz * t);
    out.push_back(cfg.contrast.apply(s * s));
  }
  return out;
}

void RamseyConfig::validate() const {
  if (!(t2_star_s > 0.0) || !std::isfinite(t2_star_s)) throw InvalidParameter("T2_star must be > 0");
  if (!(decay_exponent >= 1.0 && decay_exponent <= 3.0))
    throw InvalidParameter("decay_exponent must lie in [1, 3]");
  if (!std::isfinite(detuning_khz)) throw InvalidParameter("detuning must be finite");
  if (beat_splitting_khz && !std::isfinite(*beat_splitting_khz))
    throw InvalidParameter("beat_splitting must be finite");
  check_durations(durations_s);
  contrast.validate();
}

double ramsey_envelope(const RamseyConfig &cfg, double t) {
  const double decay = std::exp(-std::pow(t / cfg.t2_star_s, cfg.decay_exponent));
  const double beat = cfg.beat_splitting_khz ? std::cos(kPi * *cfg.beat_splitting_khz * 1e3 * t) : 1.0;
  return beat * decay;
}

std::vector<double> ramsey_signal(const RamseyConfig &cfg) {
  cfg.validate();
  std::vector<double> out;
  out.reserve(cfg.durations_s.size());
  for (double t : cfg.durations_s) {
    const double p = 0.5 * (1.0 + std::cos(2.0 * kPi * cfg.detuning_khz * 1e3 * t) * ramsey_envelope(cfg, t));
    out.push_back(cfg.contrast.apply(p));
  }
  return out;
}

std::vector<double> sample_signal(const std::vector<double> &probabilities, long shots, std::uint64_t seed) {
  if (shots < 1) throw InvalidParameter("shots must be >= 1");
  Engine eng = stream_engine(seed, 0);
  std::vector<double> out;
  out.reserve(probabilities.size());
  for (double p : probabilities) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidParameter("signal probabilities must lie in [0, 1]");
    std::binomial_distribution<long> draw(shots, p);
    out.push_back(static_cast<double>(draw(eng)) / static_cast<double>(shots));
  }
  return out;
}

RamseyFit fit_ramsey(const std::vector<double> &durations_s, const std::vector<double> &signal,
                     const RamseyConfig &model, const RamseyFitOptions &opts) {
  if (durations_s.size() != signal.size() || durations_s.size() < 4)
    throw InvalidParameter("Ramsey fit needs matching durations and signal, at least 4 points");
  check_durations(durations_s);

  RamseyConfig trial = model;
  trial.durations_s = durations_s;
  auto sse = [&](double detuning, double beat, double t2) {
    trial.detuning_khz = detuning;
    trial.beat_splitting_khz = beat;
    trial.t2_star_s = t2;
    double s = 0.0;
    for (std::size_t i = 0; i < durations_s.size(); ++i) {
      const double t = durations_s[i];
      const double p = 0.5 * (1.0 + std::cos(2.0 * kPi * detuning * 1e3 * t) * ramsey_envelope(trial, t));
      const double r = trial.contrast.apply(p) - signal[i];
      s += r * r;
    }
    return s;
  };

  double best = std::numeric_limits<double>::infinity();
  std::vector<double> x0(3);
  for (int i = 0; i < opts.grid_detuning; ++i) {
    const double d = opts.detuning_lo_khz +
                     (opts.detuning_hi_khz - opts.detuning_lo_khz) * i / std::max(1, opts.grid_detuning - 1);
    for (int j = 0; j < opts.grid_beat; ++j) {
      const double b = opts.beat_hi_khz * j / std::max(1, opts.grid_beat - 1);
      if (b / 2.0 >= d) continue;
      for (int k = 0; k < opts.grid_t2; ++k) {
        const double t2 = opts.t2_lo_s * std::pow(opts.t2_hi_s / opts.t2_lo_s,
                                                  static_cast<double>(k) / std::max(1, opts.grid_t2 - 1));
        const double v = sse(d, b, t2);
        if (v < best) {
          best = v;
          x0 = {d, b, std::log(t2)};
        }
      }
    }
  }

  auto objective = [&](const std::vector<double> &x) {
    const double d = x[0], b = std::abs(x[1]);
    if (d <= 0.0 || b / 2.0 >= d) return std::numeric_limits<double>::infinity();
    return sse(d, b, std::exp(x[2]));
  };
  const double dd = (opts.detuning_hi_khz - opts.detuning_lo_khz) / std::max(1, opts.grid_detuning - 1);
  const double db = opts.beat_hi_khz / std::max(1, opts.grid_beat - 1);
  SimplexOptions sopts;
  sopts.rel_tolerance = 1e-10;
  sopts.abs_tolerance = 1e-14;
  SimplexResult r = nelder_mead(objective, x0, {dd / 2, db / 2 + 1e-3, 0.2}, sopts);
  if (r.converged) r = nelder_mead(objective, r.x, {dd / 10, db / 10 + 1e-4, 0.05}, sopts);

  RamseyFit fit;
  fit.detuning_khz = r.x[0];
  fit.beat_splitting_khz = std::abs(r.x[1]);
  fit.t2_star_s = std::exp(r.x[2]);
  fit.residual_ss = r.value;
  fit.converged = r.converged;
  return fit;
}

}  // namespace repread
