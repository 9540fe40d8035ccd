#pragma once

#include <cstddef>
#include <vector>

namespace repread {

double poisson_log_pmf(double mean, long k);
double poisson_pmf(double mean, long k);

/// Poisson pmf on 0..k_max, with k_max the first index past which every
/// remaining term is below `cutoff` (relative to 1) or `limit` reached.
std::vector<double> poisson_kernel(double mean, double cutoff = 1e-20,
                                   std::size_t limit = 1u << 20);

/// Smallest n with P(X > n) < tail for X ~ Poisson(mean).
long poisson_quantile_tail(double mean, double tail);

/// Count-support size used by the DP models: the Poisson tail point at
/// 1e-9, doubled, and never below `floor`.
long auto_support(double mean, long floor = 16);

}  // namespace repread
