#include "repread/histogram.hpp"

#include <algorithm>
#include <cmath>

namespace repread {

double DiscretePmf::sum() const {
  double s = 0.0;
  for (double x : p) s += x;
  return s;
}

double DiscretePmf::prob_le(long x) const {
  double s = 0.0;
  for (long v = offset; v <= std::min(x, max_value()); ++v) s += p[v - offset];
  return s;
}

double DiscretePmf::prob_ge(long x) const {
  double s = 0.0;
  for (long v = std::max(x, offset); v <= max_value(); ++v) s += p[v - offset];
  return s;
}

void Histogram::add(long value, std::uint64_t n) {
  if (counts_.empty()) {
    if (value < offset_) offset_ = value;
  } else if (value < offset_) {
    counts_.insert(counts_.begin(), static_cast<std::size_t>(offset_ - value), 0);
    offset_ = value;
  }
  const auto idx = static_cast<std::size_t>(value - offset_);
  if (idx >= counts_.size()) counts_.resize(idx + 1, 0);
  counts_[idx] += n;
  trials_ += n;
}

void Histogram::merge(const Histogram &other) {
  for (std::size_t i = 0; i < other.counts_.size(); ++i)
    if (other.counts_[i] > 0) add(other.offset_ + static_cast<long>(i), other.counts_[i]);
}

std::uint64_t Histogram::count(long value) const {
  const long i = value - offset_;
  return i >= 0 && i < static_cast<long>(counts_.size()) ? counts_[i] : 0;
}

double Histogram::mean() const {
  if (trials_ == 0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < counts_.size(); ++i)
    s += static_cast<double>(counts_[i]) * static_cast<double>(offset_ + static_cast<long>(i));
  return s / static_cast<double>(trials_);
}

DiscretePmf Histogram::normalized() const {
  DiscretePmf out{offset_, std::vector<double>(counts_.size(), 0.0)};
  if (trials_ == 0) return out;
  for (std::size_t i = 0; i < counts_.size(); ++i)
    out.p[i] = static_cast<double>(counts_[i]) / static_cast<double>(trials_);
  return out;
}

double total_variation(const DiscretePmf &a, const DiscretePmf &b) {
  const long lo = std::min(a.min_value(), b.min_value());
  const long hi = std::max(a.max_value(), b.max_value());
  double s = 0.0;
  for (long x = lo; x <= hi; ++x) s += std::abs(a[x] - b[x]);
  return 0.5 * s;
}

}  // namespace repread
