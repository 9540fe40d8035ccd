#include "repread/poisson.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "repread/error.hpp"

namespace repread {

double poisson_log_pmf(double mean, long k) {
  if (k < 0) return -std::numeric_limits<double>::infinity();
  if (mean == 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  return k * std::log(mean) - mean - std::lgamma(k + 1.0);
}

double poisson_pmf(double mean, long k) { return std::exp(poisson_log_pmf(mean, k)); }

std::vector<double> poisson_kernel(double mean, double cutoff, std::size_t limit) {
  if (!(mean >= 0.0) || !std::isfinite(mean))
    throw InvalidParameter("Poisson mean must be finite and >= 0");
  std::vector<double> kernel;
  if (mean == 0.0) return {1.0};
  for (long k = 0; static_cast<std::size_t>(k) < limit; ++k) {
    const double p = poisson_pmf(mean, k);
    kernel.push_back(p);
    if (k > mean && p < cutoff) break;
  }
  return kernel;
}

long poisson_quantile_tail(double mean, double tail) {
  if (!(mean >= 0.0) || !std::isfinite(mean))
    throw InvalidParameter("Poisson mean must be finite and >= 0");
  double cdf = 0.0;
  // Sum in log space is unnecessary here: means stay far below exp overflow.
  for (long n = 0;; ++n) {
    cdf += poisson_pmf(mean, n);
    if (1.0 - cdf < tail && n >= mean) return n;
    if (n > 10 * mean + 1000) return n;
  }
}

long auto_support(double mean, long floor) {
  return std::max(floor, 2 * poisson_quantile_tail(mean, 1e-9));
}

}  // namespace repread
