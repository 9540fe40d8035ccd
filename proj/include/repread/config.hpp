#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "repread/alt_readout.hpp"
#include "repread/dynamics.hpp"
#include "repread/endor.hpp"
#include "repread/readout.hpp"
#include "repread/spin_model.hpp"

namespace repread {

inline constexpr int kSchemaVersion = 1;

struct ReadoutBlock {
  ReadoutParams params;  // repetitions = N
  std::optional<double> t_laser_s;  // when set, t_rep = t_laser + gate_overhead
  double gate_overhead_s = 2e-6;
  double crc_pass = 1.0;
  long bright_threshold = 3;
  std::vector<long> n_list;
  long dark_max_hi = 5;
  long bright_min_hi = 40;
  long prep_n = 300;
  long prep_n_min = 0;
  long prep_n_max = 0;
  std::uint64_t trials = 100000;
};

struct AltBlock {
  long n_pairs = 50;
  std::vector<long> n_pairs_list;
  long k_hi = 20;
  AltConditioning conditioning = AltConditioning::signed_difference;
  long threshold = 2;
  std::uint64_t trials = 100000;
};

struct TrajectoryBlock {
  double t_total_s = 10.0;
  long n_bin = 100;
  double p_threshold = 0.5;
};

struct DurationGrid {
  double start_s = 0.0;
  double stop_s = 20e-3;
  long points = 201;

  std::vector<double> values() const;
};

struct DynamicsBlock {
  double rabi_frequency_khz = 1.0;
  double detuning_khz = 1.0;
  double t2_star_s = 7.4e-3;
  double decay_exponent = 2.0;
  std::optional<double> beat_splitting_khz;
  DurationGrid durations;
  ContrastMap contrast;
  long shots = 0;  // 0 = noiseless signal

  std::vector<BathSpin> bath;
  double endor_f_lo_khz = 1000.0;
  double endor_f_hi_khz = 1700.0;
  long endor_points = 14001;
  double endor_baseline = 0.0;
  double endor_min_prominence = 0.1;
  double match_tolerance_khz = 1.0;
  double match_single_window_khz = 100.0;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  std::optional<SpinSystem> spin_system;
  GyromagneticTable gyromagnetic;
  ReadoutBlock readout;
  AltBlock alt;
  TrajectoryBlock trajectory;
  DynamicsBlock dynamics;
  std::optional<std::uint64_t> seed;
  std::string output_dir = "out";

  // "key.path=value" for every default filled in while loading.
  std::vector<std::string> applied_defaults;
};

/// Parses and validates a configuration document. Unknown keys, missing
/// required keys, wrong types, out-of-range values and unit-suffix
/// mismatches raise ValidationError naming the key path.
ExperimentConfig parse_config(const std::string &json_text);
ExperimentConfig load_config(const std::string &path);

/// Canonical JSON with every field explicit; parse_config of the result
/// reproduces the configuration.
std::string serialize_config(const ExperimentConfig &cfg);

}  // namespace repread
