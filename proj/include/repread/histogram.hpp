#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace repread {

/// Pmf over a contiguous integer support starting at `offset`.
struct DiscretePmf {
  long offset = 0;
  std::vector<double> p;

  long min_value() const { return offset; }
  long max_value() const { return offset + static_cast<long>(p.size()) - 1; }
  double operator[](long x) const {
    const long i = x - offset;
    return i >= 0 && i < static_cast<long>(p.size()) ? p[i] : 0.0;
  }
  double sum() const;
  double prob_le(long x) const;
  double prob_ge(long x) const;
};

struct HistogramMeta {
  std::uint64_t seed = 0;
  std::string params_hash;
  std::string conditioning;
  long repetitions = 0;  // repetitions (or pairs) summed per trial
};

/// Integer occurrence counts over a contiguous support starting at `offset`.
class Histogram {
 public:
  Histogram() = default;
  explicit Histogram(long offset) : offset_(offset) {}

  void add(long value, std::uint64_t n = 1);
  void merge(const Histogram &other);

  long offset() const { return offset_; }
  long max_value() const { return offset_ + static_cast<long>(counts_.size()) - 1; }
  const std::vector<std::uint64_t> &counts() const { return counts_; }
  std::uint64_t count(long value) const;
  std::uint64_t trials() const { return trials_; }
  double mean() const;

  /// Empirical pmf (counts / trials).
  DiscretePmf normalized() const;

  HistogramMeta meta;

  friend bool operator==(const Histogram &a, const Histogram &b) {
    return a.offset_ == b.offset_ && a.counts_ == b.counts_ && a.trials_ == b.trials_;
  }

 private:
  long offset_ = 0;
  std::vector<std::uint64_t> counts_;
  std::uint64_t trials_ = 0;
};

/// Total-variation distance between two pmfs on the integers.
double total_variation(const DiscretePmf &a, const DiscretePmf &b);

}  // namespace repread
