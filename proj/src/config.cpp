#include "repread/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "repread/error.hpp"

namespace repread {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

const std::set<std::string> kUnitTokens = {"Hz", "kHz", "MHz", "GHz", "s", "ms", "us", "ns", "T", "mT", "G"};

// Key with unit tokens removed; everything from "per" onwards is a unit too.
std::string unit_stem(const std::string &key) {
  std::string stem;
  std::stringstream ss(key);
  std::string tok;
  while (std::getline(ss, tok, '_')) {
    if (tok == "per") break;
    if (kUnitTokens.count(tok)) continue;
    stem += (stem.empty() ? "" : "_") + tok;
  }
  return stem;
}

std::string join(const std::string &path, const std::string &key) { return path.empty() ? key : path + "." + key; }

template <class T>
std::string show(const T &v) {
  return json(v).dump();
}

// Object view that tracks which keys were consulted, so leftovers can be
// reported as unknown once the block is fully read.
class Block {
 public:
  Block(const json &j, std::string path, std::vector<std::string> &defaults)
      : j_(j), path_(std::move(path)), defaults_(defaults) {
    if (!j_.is_object()) throw ValidationError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool has(const std::string &key) {
    known_.insert(key);
    return j_.contains(key);
  }

  template <class T>
  T req(const std::string &key) {
    if (!has(key)) throw ValidationError(join(path_, key), "required key missing");
    return get<T>(key);
  }

  template <class T>
  T opt(const std::string &key, const T &fallback) {
    if (!has(key)) {
      defaults_.push_back(join(path_, key) + "=" + show(fallback));
      return fallback;
    }
    return get<T>(key);
  }

  template <class T>
  std::optional<T> maybe(const std::string &key) {
    if (!has(key)) return std::nullopt;
    return get<T>(key);
  }

  const json &child(const std::string &key) {
    known_.insert(key);
    return j_.at(key);
  }

  std::string path(const std::string &key) const { return join(path_, key); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (known_.count(it.key())) continue;
      const std::string stem = unit_stem(it.key());
      for (const std::string &k : known_)
        if (unit_stem(k) == stem && k != it.key())
          throw ValidationError(join(path_, it.key()), "unit suffix mismatch, expected '" + k + "'");
      throw ValidationError(join(path_, it.key()), "unknown key");
    }
  }

 private:
  template <class T>
  T get(const std::string &key) {
    const json &v = j_.at(key);
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ValidationError(join(path_, key), "expected a number");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ValidationError(join(path_, key), "expected an integer");
        if constexpr (std::is_unsigned_v<T>)
          if (v.is_number_integer() && !v.is_number_unsigned())
            throw ValidationError(join(path_, key), "expected a non-negative integer");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ValidationError(join(path_, key), "expected a string");
      } else if constexpr (std::is_same_v<T, std::vector<long>>) {
        if (!v.is_array()) throw ValidationError(join(path_, key), "expected an array of integers");
        for (const json &e : v)
          if (!e.is_number_integer()) throw ValidationError(join(path_, key), "expected an array of integers");
      }
      return v.get<T>();
    } catch (const json::exception &e) {
      throw ValidationError(join(path_, key), e.what());
    }
  }

  const json &j_;
  std::string path_;
  std::vector<std::string> &defaults_;
  std::set<std::string> known_;
};

void require(bool ok, const std::string &path, const std::string &what) {
  if (!ok) throw ValidationError(path, what);
}

bool finite_ge(double x, double lo) { return std::isfinite(x) && x >= lo; }
bool finite_gt(double x, double lo) { return std::isfinite(x) && x > lo; }

HyperfineTensor read_tensor(const json &j, const std::string &path, std::vector<std::string> &defaults) {
  Block b(j, path, defaults);
  HyperfineTensor t{b.req<double>("Axx_MHz"), b.req<double>("Ayy_MHz"), b.req<double>("Azz_MHz")};
  for (double v : {t.a_xx, t.a_yy, t.a_zz}) require(std::isfinite(v), path, "hyperfine components must be finite");
  b.finish();
  return t;
}

SpinSystem read_spin_system(const json &j, ExperimentConfig &cfg) {
  Block b(j, "spin_system", cfg.applied_defaults);
  SpinSystem s;
  s.d_ground = b.req<double>("D_ground_MHz");
  s.d_excited = b.req<double>("D_excited_MHz");
  s.gamma_e = b.req<double>("gamma_e_MHz_per_T");
  s.gamma_n = b.req<double>("gamma_n_MHz_per_T");
  s.b_z = b.req<double>("B_T");
  for (const char *k : {"D_ground_MHz", "D_excited_MHz", "gamma_e_MHz_per_T", "gamma_n_MHz_per_T", "B_T"})
    require(std::isfinite(b.req<double>(k)), b.path(k), "must be finite");
  s.hf_ground = read_tensor(b.child("hyperfine"), b.path("hyperfine"), cfg.applied_defaults);
  if (b.has("hyperfine_excited"))
    s.hf_excited = read_tensor(b.child("hyperfine_excited"), b.path("hyperfine_excited"), cfg.applied_defaults);
  if (b.has("gyromagnetic")) {
    Block g(b.child("gyromagnetic"), b.path("gyromagnetic"), cfg.applied_defaults);
    cfg.gyromagnetic.si29 = g.opt("Si29_MHz_per_T", cfg.gyromagnetic.si29);
    cfg.gyromagnetic.c13 = g.opt("C13_MHz_per_T", cfg.gyromagnetic.c13);
    g.finish();
  }
  b.finish();
  try {
    s.validate();
  } catch (const InvalidParameter &e) {
    throw ValidationError("spin_system", e.what());
  }
  return s;
}

void read_readout(const json &j, ExperimentConfig &cfg) {
  Block b(j, "readout", cfg.applied_defaults);
  ReadoutBlock &r = cfg.readout;
  ReadoutParams &p = r.params;
  p.gamma_bright_hz = b.req<double>("gamma_bright_Hz");
  require(finite_ge(p.gamma_bright_hz, 0.0), b.path("gamma_bright_Hz"), "must be finite and >= 0");
  p.gamma_dark_hz = b.req<double>("gamma_dark_Hz");
  require(finite_ge(p.gamma_dark_hz, 0.0), b.path("gamma_dark_Hz"), "must be finite and >= 0");
  p.lambda_bright = b.req<double>("lambda_bright_per_rep");
  require(finite_ge(p.lambda_bright, 0.0), b.path("lambda_bright_per_rep"), "must be finite and >= 0");
  p.lambda_dark = b.opt("lambda_dark_per_rep", 0.001);
  require(finite_ge(p.lambda_dark, 0.0), b.path("lambda_dark_per_rep"), "must be finite and >= 0");
  require(p.lambda_bright >= p.lambda_dark, b.path("lambda_bright_per_rep"), "must be >= lambda_dark_per_rep");

  const bool has_rep = b.has("t_rep_s"), has_laser = b.has("t_laser_s");
  require(!(has_rep && has_laser), b.path("t_rep_s"), "give either t_rep_s or t_laser_s, not both");
  if (has_laser) {
    r.t_laser_s = b.req<double>("t_laser_s");
    require(finite_gt(*r.t_laser_s, 0.0), b.path("t_laser_s"), "must be > 0");
    r.gate_overhead_s = b.opt("gate_overhead_s", 2e-6);
    require(finite_ge(r.gate_overhead_s, 0.0), b.path("gate_overhead_s"), "must be >= 0");
    p.t_rep_s = *r.t_laser_s + r.gate_overhead_s;
  } else {
    p.t_rep_s = b.req<double>("t_rep_s");
    require(finite_gt(p.t_rep_s, 0.0), b.path("t_rep_s"), "must be > 0");
  }
  p.repetitions = b.opt("N", 250L);
  require(p.repetitions >= 1, b.path("N"), "must be >= 1");
  r.crc_pass = b.opt("crc_pass", 1.0);
  require(r.crc_pass > 0.0 && r.crc_pass <= 1.0, b.path("crc_pass"), "must lie in (0, 1]");
  r.bright_threshold = b.opt("bright_threshold", 3L);
  require(r.bright_threshold >= 1, b.path("bright_threshold"), "must be >= 1");
  r.n_list = b.opt("N_list", std::vector<long>{50, 100, 150, 200, 250, 300, 400, 500, 700});
  require(!r.n_list.empty(), b.path("N_list"), "must not be empty");
  for (long n : r.n_list) require(n >= 1, b.path("N_list"), "entries must be >= 1");
  r.dark_max_hi = b.opt("dark_max_hi", 5L);
  require(r.dark_max_hi >= 0, b.path("dark_max_hi"), "must be >= 0");
  r.bright_min_hi = b.opt("bright_min_hi", 40L);
  require(r.bright_min_hi > r.dark_max_hi, b.path("bright_min_hi"), "must exceed dark_max_hi");
  r.prep_n = b.opt("prep_N", 300L);
  require(r.prep_n >= 1, b.path("prep_N"), "must be >= 1");
  r.prep_n_min = b.opt("prep_n_min", 0L);
  r.prep_n_max = b.opt("prep_n_max", 0L);
  require(r.prep_n_min >= 0 && r.prep_n_max >= r.prep_n_min, b.path("prep_n_max"),
          "need 0 <= prep_n_min <= prep_n_max");
  r.trials = b.opt<std::uint64_t>("trials", 100000);
  require(r.trials >= 1, b.path("trials"), "must be >= 1");
  b.finish();
}

void read_alt(const json &j, ExperimentConfig &cfg) {
  Block b(j, "alt", cfg.applied_defaults);
  AltBlock &a = cfg.alt;
  a.n_pairs = b.opt("N_pairs", 50L);
  require(a.n_pairs >= 1, b.path("N_pairs"), "must be >= 1");
  a.n_pairs_list = b.opt("N_pairs_list", std::vector<long>{25, 50, 75, 100, 150, 200});
  require(!a.n_pairs_list.empty(), b.path("N_pairs_list"), "must not be empty");
  for (long n : a.n_pairs_list) require(n >= 1, b.path("N_pairs_list"), "entries must be >= 1");
  a.k_hi = b.opt("k_hi", 20L);
  require(a.k_hi >= 1, b.path("k_hi"), "must be >= 1");
  const std::string mode = b.opt<std::string>("conditioning", "signed");
  require(mode == "signed" || mode == "single_sided", b.path("conditioning"),
          "must be 'signed' or 'single_sided'");
  a.conditioning = mode == "signed" ? AltConditioning::signed_difference : AltConditioning::single_sided;
  a.threshold = b.opt("threshold", 2L);
  require(a.threshold >= 1, b.path("threshold"), "must be >= 1");
  a.trials = b.opt<std::uint64_t>("trials", 100000);
  require(a.trials >= 1, b.path("trials"), "must be >= 1");
  b.finish();
}

void read_trajectory(const json &j, ExperimentConfig &cfg) {
  Block b(j, "trajectory", cfg.applied_defaults);
  TrajectoryBlock &t = cfg.trajectory;
  t.t_total_s = b.opt("T_total_s", 10.0);
  require(finite_gt(t.t_total_s, 0.0), b.path("T_total_s"), "must be > 0");
  t.n_bin = b.opt("N_bin", 100L);
  require(t.n_bin >= 1, b.path("N_bin"), "must be >= 1");
  t.p_threshold = b.opt("p_threshold", 0.5);
  require(t.p_threshold >= 0.0 && t.p_threshold <= 1.0, b.path("p_threshold"), "must lie in [0, 1]");
  b.finish();
}

BathSpin read_bath_spin(const json &j, const std::string &path, std::vector<std::string> &defaults) {
  Block b(j, path, defaults);
  BathSpin s;
  const std::string species = b.req<std::string>("species");
  try {
    s.species = parse_species(species);
  } catch (const Error &e) {
    throw ValidationError(b.path("species"), e.what());
  }
  s.azz_khz = b.req<double>("Azz_kHz");
  require(std::isfinite(s.azz_khz), b.path("Azz_kHz"), "must be finite");
  s.amplitude = b.opt("amplitude", 0.5);
  require(finite_ge(s.amplitude, 0.0), b.path("amplitude"), "must be >= 0");
  s.t_rf_s = b.opt("T_rf_s", 0.5e-3);
  require(finite_gt(s.t_rf_s, 0.0), b.path("T_rf_s"), "must be > 0");
  b.finish();
  return s;
}

void read_dynamics(const json &j, ExperimentConfig &cfg) {
  Block b(j, "dynamics", cfg.applied_defaults);
  DynamicsBlock &d = cfg.dynamics;
  d.rabi_frequency_khz = b.opt("rabi_frequency_kHz", 1.0);
  require(finite_gt(d.rabi_frequency_khz, 0.0), b.path("rabi_frequency_kHz"), "must be > 0");
  d.detuning_khz = b.opt("detuning_kHz", 1.0);
  require(std::isfinite(d.detuning_khz), b.path("detuning_kHz"), "must be finite");
  d.t2_star_s = b.opt("T2_star_s", 7.4e-3);
  require(finite_gt(d.t2_star_s, 0.0), b.path("T2_star_s"), "must be > 0");
  d.decay_exponent = b.opt("decay_exponent", 2.0);
  require(d.decay_exponent >= 1.0 && d.decay_exponent <= 3.0, b.path("decay_exponent"), "must lie in [1, 3]");
  d.beat_splitting_khz = b.maybe<double>("beat_splitting_kHz");
  if (d.beat_splitting_khz)
    require(finite_ge(*d.beat_splitting_khz, 0.0), b.path("beat_splitting_kHz"), "must be >= 0");
  d.durations.start_s = b.opt("durations_start_s", 0.0);
  d.durations.stop_s = b.opt("durations_stop_s", 20e-3);
  d.durations.points = b.opt("durations_points", 201L);
  require(finite_ge(d.durations.start_s, 0.0), b.path("durations_start_s"), "must be >= 0");
  require(finite_gt(d.durations.stop_s, d.durations.start_s), b.path("durations_stop_s"),
          "must exceed durations_start_s");
  require(d.durations.points >= 2, b.path("durations_points"), "must be >= 2");
  d.contrast.f_dark = b.opt("contrast_F_dark", 1.0);
  d.contrast.f_bright = b.opt("contrast_F_bright", 1.0);
  require(d.contrast.f_dark >= 0.0 && d.contrast.f_dark <= 1.0, b.path("contrast_F_dark"), "must lie in [0, 1]");
  require(d.contrast.f_bright >= 0.0 && d.contrast.f_bright <= 1.0, b.path("contrast_F_bright"),
          "must lie in [0, 1]");
  d.shots = b.opt("shots", 0L);
  require(d.shots >= 0, b.path("shots"), "must be >= 0");

  if (b.has("bath")) {
    const json &bath = b.child("bath");
    require(bath.is_array(), b.path("bath"), "expected an array");
    for (std::size_t i = 0; i < bath.size(); ++i)
      d.bath.push_back(read_bath_spin(bath[i], b.path("bath") + "[" + std::to_string(i) + "]", cfg.applied_defaults));
  } else {
    cfg.applied_defaults.push_back(b.path("bath") + "=[]");
  }
  d.endor_f_lo_khz = b.opt("endor_f_lo_kHz", 1100.0);
  d.endor_f_hi_khz = b.opt("endor_f_hi_kHz", 1600.0);
  require(finite_gt(d.endor_f_hi_khz, d.endor_f_lo_khz), b.path("endor_f_hi_kHz"), "must exceed endor_f_lo_kHz");
  d.endor_points = b.opt("endor_points", 10001L);
  require(d.endor_points >= 3, b.path("endor_points"), "must be >= 3");
  d.endor_baseline = b.opt("endor_baseline", 0.0);
  require(d.endor_baseline >= 0.0 && d.endor_baseline <= 1.0, b.path("endor_baseline"), "must lie in [0, 1]");
  d.endor_min_prominence = b.opt("endor_min_prominence", 0.1);
  require(finite_gt(d.endor_min_prominence, 0.0), b.path("endor_min_prominence"), "must be > 0");
  d.match_tolerance_khz = b.opt("match_tolerance_kHz", 1.0);
  require(finite_gt(d.match_tolerance_khz, 0.0), b.path("match_tolerance_kHz"), "must be > 0");
  d.match_single_window_khz = b.opt("match_single_window_kHz", 100.0);
  require(finite_ge(d.match_single_window_khz, 0.0), b.path("match_single_window_kHz"), "must be >= 0");
  b.finish();
}

}  // namespace

std::vector<double> DurationGrid::values() const {
  std::vector<double> v(static_cast<std::size_t>(points));
  for (long i = 0; i < points; ++i) v[i] = start_s + (stop_s - start_s) * static_cast<double>(i) / (points - 1);
  return v;
}

ExperimentConfig parse_config(const std::string &json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error &e) {
    throw ValidationError("<document>", e.what());
  }
  ExperimentConfig cfg;
  Block b(root, "", cfg.applied_defaults);
  cfg.schema_version = b.req<int>("schema_version");
  require(cfg.schema_version == kSchemaVersion, "schema_version",
          "unsupported version " + std::to_string(cfg.schema_version));
  if (b.has("spin_system")) cfg.spin_system = read_spin_system(b.child("spin_system"), cfg);
  read_readout(b.has("readout") ? b.child("readout") : throw ValidationError("readout", "required key missing"), cfg);
  const json empty = json::object();
  read_alt(b.has("alt") ? b.child("alt") : empty, cfg);
  read_trajectory(b.has("trajectory") ? b.child("trajectory") : empty, cfg);
  read_dynamics(b.has("dynamics") ? b.child("dynamics") : empty, cfg);
  cfg.seed = b.maybe<std::uint64_t>("seed");
  cfg.output_dir = b.opt<std::string>("output_dir", "out");
  b.finish();
  return cfg;
}

ExperimentConfig load_config(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig &cfg) {
  ojson root;
  root["schema_version"] = cfg.schema_version;
  if (cfg.spin_system) {
    const SpinSystem &s = *cfg.spin_system;
    auto tensor = [](const HyperfineTensor &t) {
      ojson o;
      o["Axx_MHz"] = t.a_xx;
      o["Ayy_MHz"] = t.a_yy;
      o["Azz_MHz"] = t.a_zz;
      return o;
    };
    ojson o;
    o["D_ground_MHz"] = s.d_ground;
    o["D_excited_MHz"] = s.d_excited;
    o["gamma_e_MHz_per_T"] = s.gamma_e;
    o["gamma_n_MHz_per_T"] = s.gamma_n;
    o["B_T"] = s.b_z;
    o["hyperfine"] = tensor(s.hf_ground);
    if (s.hf_excited) o["hyperfine_excited"] = tensor(*s.hf_excited);
    o["gyromagnetic"] = {{"Si29_MHz_per_T", cfg.gyromagnetic.si29}, {"C13_MHz_per_T", cfg.gyromagnetic.c13}};
    root["spin_system"] = o;
  }
  {
    const ReadoutBlock &r = cfg.readout;
    ojson o;
    o["gamma_bright_Hz"] = r.params.gamma_bright_hz;
    o["gamma_dark_Hz"] = r.params.gamma_dark_hz;
    o["lambda_bright_per_rep"] = r.params.lambda_bright;
    o["lambda_dark_per_rep"] = r.params.lambda_dark;
    if (r.t_laser_s) {
      o["t_laser_s"] = *r.t_laser_s;
      o["gate_overhead_s"] = r.gate_overhead_s;
    } else {
      o["t_rep_s"] = r.params.t_rep_s;
    }
    o["N"] = r.params.repetitions;
    o["crc_pass"] = r.crc_pass;
    o["bright_threshold"] = r.bright_threshold;
    o["N_list"] = r.n_list;
    o["dark_max_hi"] = r.dark_max_hi;
    o["bright_min_hi"] = r.bright_min_hi;
    o["prep_N"] = r.prep_n;
    o["prep_n_min"] = r.prep_n_min;
    o["prep_n_max"] = r.prep_n_max;
    o["trials"] = r.trials;
    root["readout"] = o;
  }
  {
    const AltBlock &a = cfg.alt;
    ojson o;
    o["N_pairs"] = a.n_pairs;
    o["N_pairs_list"] = a.n_pairs_list;
    o["k_hi"] = a.k_hi;
    o["conditioning"] = a.conditioning == AltConditioning::signed_difference ? "signed" : "single_sided";
    o["threshold"] = a.threshold;
    o["trials"] = a.trials;
    root["alt"] = o;
  }
  root["trajectory"] = {{"T_total_s", cfg.trajectory.t_total_s},
                        {"N_bin", cfg.trajectory.n_bin},
                        {"p_threshold", cfg.trajectory.p_threshold}};
  {
    const DynamicsBlock &d = cfg.dynamics;
    ojson o;
    o["rabi_frequency_kHz"] = d.rabi_frequency_khz;
    o["detuning_kHz"] = d.detuning_khz;
    o["T2_star_s"] = d.t2_star_s;
    o["decay_exponent"] = d.decay_exponent;
    if (d.beat_splitting_khz) o["beat_splitting_kHz"] = *d.beat_splitting_khz;
    o["durations_start_s"] = d.durations.start_s;
    o["durations_stop_s"] = d.durations.stop_s;
    o["durations_points"] = d.durations.points;
    o["contrast_F_dark"] = d.contrast.f_dark;
    o["contrast_F_bright"] = d.contrast.f_bright;
    o["shots"] = d.shots;
    ojson bath = ojson::array();
    for (const BathSpin &s : d.bath)
      bath.push_back({{"species", std::string(to_string(s.species))},
                      {"Azz_kHz", s.azz_khz},
                      {"amplitude", s.amplitude},
                      {"T_rf_s", s.t_rf_s}});
    o["bath"] = bath;
    o["endor_f_lo_kHz"] = d.endor_f_lo_khz;
    o["endor_f_hi_kHz"] = d.endor_f_hi_khz;
    o["endor_points"] = d.endor_points;
    o["endor_baseline"] = d.endor_baseline;
    o["endor_min_prominence"] = d.endor_min_prominence;
    o["match_tolerance_kHz"] = d.match_tolerance_khz;
    o["match_single_window_kHz"] = d.match_single_window_khz;
    root["dynamics"] = o;
  }
  if (cfg.seed) root["seed"] = *cfg.seed;
  root["output_dir"] = cfg.output_dir;
  return root.dump(2) + "\n";
}

}  // namespace repread
