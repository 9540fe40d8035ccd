#include "repread/csv_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

#include "repread/error.hpp"

namespace repread {

namespace {

// Buffered single-writer output; flushes on close and reports I/O failure.
class CsvOut {
 public:
  CsvOut(const std::string &path, std::string_view header) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw IoError("cannot write '" + path + "'");
    buf_.append(header).push_back('\n');
  }
  ~CsvOut() = default;

  CsvOut &num(long v) {
    sep();
    char tmp[32];
    auto r = std::to_chars(tmp, tmp + sizeof tmp, v);
    buf_.append(tmp, r.ptr);
    return *this;
  }
  CsvOut &num(double v) {
    sep();
    char tmp[40];
    const int n = std::snprintf(tmp, sizeof tmp, "%.12g", v);
    buf_.append(tmp, static_cast<std::size_t>(n));
    return *this;
  }
  CsvOut &str(std::string_view s) {
    sep();
    buf_.append(s);
    return *this;
  }
  void end_row() {
    buf_.push_back('\n');
    fresh_ = true;
    if (buf_.size() > (1u << 20)) flush();
  }
  void close() {
    flush();
    out_.close();
    if (!out_) throw IoError("write failed for '" + path_ + "'");
  }

 private:
  void sep() {
    if (!fresh_) buf_.push_back(',');
    fresh_ = false;
  }
  void flush() {
    out_.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
    buf_.clear();
  }

  std::string path_;
  std::ofstream out_;
  std::string buf_;
  bool fresh_ = true;
};

std::string slurp(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Line-oriented reader over an in-memory file.
class CsvIn {
 public:
  explicit CsvIn(const std::string &path) : path_(path), data_(slurp(path)) {}

  bool next(std::vector<std::string_view> &fields) {
    while (pos_ < data_.size()) {
      std::size_t end = data_.find('\n', pos_);
      if (end == std::string::npos) end = data_.size();
      std::string_view line(data_.data() + pos_, end - pos_);
      pos_ = end + 1;
      ++line_;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.empty()) continue;
      fields.clear();
      std::size_t start = 0;
      while (true) {
        const std::size_t comma = line.find(',', start);
        fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string &what) const {
    throw ValidationError(path_ + ":" + std::to_string(line_), what);
  }

  long integer(std::string_view s, const char *what) const {
    long v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) fail(std::string("malformed ") + what);
    return v;
  }

  double real(std::string_view s, const char *what) const {
    double v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) fail(std::string("malformed ") + what);
    return v;
  }

  void expect_header(std::vector<std::string_view> &fields, const std::vector<std::string> &names) {
    if (!next(fields)) fail("missing header");
    bool ok = fields.size() == names.size();
    for (std::size_t i = 0; ok && i < names.size(); ++i) ok = fields[i] == names[i];
    if (!ok) {
      std::string want;
      for (const auto &n : names) want += (want.empty() ? "" : ",") + n;
      fail("header mismatch, expected '" + want + "'");
    }
  }

 private:
  std::string path_;
  std::string data_;
  std::size_t pos_ = 0;
  long line_ = 0;
};

}  // namespace

void write_histogram(const std::string &path, const Histogram &h, const std::string &value_name) {
  CsvOut out(path, value_name + ",count");
  for (std::size_t i = 0; i < h.counts().size(); ++i)
    out.num(h.offset() + static_cast<long>(i)).num(static_cast<long>(h.counts()[i])).end_row();
  out.close();
}

Histogram read_histogram(const std::string &path) {
  CsvIn in(path);
  std::vector<std::string_view> f;
  if (!in.next(f)) in.fail("missing header");
  if (f.size() != 2 || (f[0] != "n" && f[0] != "k") || f[1] != "count")
    in.fail("header mismatch, expected 'n,count' or 'k,count'");
  const bool signed_values = f[0] == "k";
  Histogram h;
  bool first = true;
  while (in.next(f)) {
    if (f.size() != 2) in.fail("expected 2 fields");
    const long v = in.integer(f[0], "value");
    const long c = in.integer(f[1], "count");
    if (!signed_values && v < 0) in.fail("negative photon count value");
    if (c < 0) in.fail("negative occurrence count");
    if (first) {
      h = Histogram(v);
      first = false;
    }
    if (c > 0) h.add(v, static_cast<std::uint64_t>(c));
  }
  if (first) in.fail("no data rows");
  return h;
}

void write_trajectory(const std::string &path, const Trajectory &traj) {
  const bool truth = traj.true_states.has_value();
  CsvOut out(path, truth ? "bin_index,count,true_state" : "bin_index,count");
  for (std::size_t i = 0; i < traj.counts.size(); ++i) {
    out.num(static_cast<long>(i)).num(traj.counts[i]);
    if (truth) out.num((*traj.true_states)[i] == HiddenState::bright ? 1L : 0L);
    out.end_row();
  }
  out.close();
}

Trajectory read_trajectory(const std::string &path, double bin_duration_s, long n_bin) {
  CsvIn in(path);
  std::vector<std::string_view> f;
  if (!in.next(f)) in.fail("missing header");
  const bool truth = f.size() == 3;
  if (!((f.size() == 2 || truth) && f[0] == "bin_index" && f[1] == "count" && (!truth || f[2] == "true_state")))
    in.fail("header mismatch, expected 'bin_index,count[,true_state]'");
  Trajectory traj;
  traj.bin_duration_s = bin_duration_s;
  traj.n_bin = n_bin;
  std::vector<HiddenState> states;
  while (in.next(f)) {
    if (f.size() != (truth ? 3u : 2u)) in.fail("wrong number of fields");
    const long index = in.integer(f[0], "bin_index");
    if (index != static_cast<long>(traj.counts.size())) in.fail("bins must be contiguous from 0");
    const long c = in.integer(f[1], "count");
    if (c < 0) in.fail("negative count");
    traj.counts.push_back(c);
    if (truth) {
      const long s = in.integer(f[2], "true_state");
      if (s != 0 && s != 1) in.fail("true_state must be 0 or 1");
      states.push_back(s == 1 ? HiddenState::bright : HiddenState::dark);
    }
  }
  if (truth) traj.true_states = std::move(states);
  traj.validate();
  return traj;
}

void write_filter_result(const std::string &path, const FilterResult &fr) {
  CsvOut out(path, "bin_index,p_bright_filtered,p_bright_smoothed");
  for (std::size_t i = 0; i < fr.filtered.size(); ++i) {
    out.num(static_cast<long>(i)).num(fr.filtered[i]);
    if (fr.smoothed.empty()) out.str("");
    else out.num(fr.smoothed[i]);
    out.end_row();
  }
  out.close();
}

void write_levels(const std::string &path, const EnergyLevels &levels) {
  CsvOut out(path, "index,energy_MHz,label_ms,label_mI,overlap");
  for (std::size_t i = 0; i < levels.levels.size(); ++i) {
    const Level &l = levels.levels[i];
    out.num(static_cast<long>(i)).num(l.energy).str(to_string(l.ms)).str(to_string(l.mi)).num(l.overlap).end_row();
  }
  out.close();
}

void write_fidelity_points(const std::string &path, const std::vector<FidelityPoint> &points) {
  CsvOut out(path, "N,n_dark_max,n_bright_min,F_dark,F_bright,F_avg,eta");
  for (const FidelityPoint &p : points)
    out.num(p.repetitions)
        .num(p.policy.dark_max)
        .num(p.policy.bright_min)
        .num(p.f_dark)
        .num(p.f_bright)
        .num(p.f_avg)
        .num(p.eta)
        .end_row();
  out.close();
}

void write_pmf(const std::string &path, const DiscretePmf &pmf, const std::string &value_name) {
  CsvOut out(path, value_name + ",prob");
  for (std::size_t i = 0; i < pmf.p.size(); ++i) out.num(pmf.offset + static_cast<long>(i)).num(pmf.p[i]).end_row();
  out.close();
}

void write_spectrum(const std::string &path, const Spectrum &sp) {
  write_series(path, "f_kHz", "contrast", sp.f_khz, sp.contrast);
}

void write_peaks(const std::string &path, const std::vector<Peak> &peaks) {
  CsvOut out(path, "center_kHz,width_kHz,depth");
  for (const Peak &p : peaks) out.num(p.center_khz).num(p.width_khz).num(p.depth).end_row();
  out.close();
}

std::vector<double> read_peak_centers(const std::string &path) {
  CsvIn in(path);
  std::vector<std::string_view> f;
  if (!in.next(f)) in.fail("missing header");
  if (f.empty() || (f[0] != "center_kHz" && f[0] != "f_kHz")) in.fail("header must start with center_kHz or f_kHz");
  std::vector<double> out;
  while (in.next(f)) out.push_back(in.real(f[0], "frequency"));
  return out;
}

void write_assignments(const std::string &path, const std::vector<PeakAssignment> &assignments) {
  CsvOut out(path, "peak_kHz,partner_kHz,species,Azz_kHz,low_confidence");
  for (const PeakAssignment &a : assignments) {
    out.num(a.peaks_khz[0]);
    if (a.peaks_khz.size() > 1) out.num(a.peaks_khz[1]);
    else out.str("");
    out.str(a.species ? to_string(*a.species) : "");
    if (a.species) out.num(a.azz_khz);
    else out.str("");
    out.num(a.low_confidence ? 1L : 0L).end_row();
  }
  out.close();
}

void write_series(const std::string &path, const std::string &x_name, const std::string &y_name,
                  const std::vector<double> &x, const std::vector<double> &y) {
  if (x.size() != y.size()) throw InvalidParameter("series columns differ in length");
  CsvOut out(path, x_name + "," + y_name);
  for (std::size_t i = 0; i < x.size(); ++i) out.num(x[i]).num(y[i]).end_row();
  out.close();
}

std::pair<std::vector<double>, std::vector<double>> read_series(const std::string &path, const std::string &x_name,
                                                                const std::string &y_name) {
  CsvIn in(path);
  std::vector<std::string_view> f;
  in.expect_header(f, {x_name, y_name});
  std::pair<std::vector<double>, std::vector<double>> out;
  while (in.next(f)) {
    if (f.size() != 2) in.fail("expected 2 fields");
    out.first.push_back(in.real(f[0], x_name.c_str()));
    out.second.push_back(in.real(f[1], y_name.c_str()));
  }
  return out;
}

}  // namespace repread
