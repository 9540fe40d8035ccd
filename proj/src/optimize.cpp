#include "repread/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "repread/error.hpp"

namespace repread {

SimplexResult nelder_mead(const std::function<double(const std::vector<double> &)> &f,
                          std::vector<double> x0, const std::vector<double> &step,
                          const SimplexOptions &opts) {
  const std::size_t n = x0.size();
  if (step.size() != n) throw InvalidParameter("simplex step size mismatch");

  SimplexResult res;
  auto eval = [&](const std::vector<double> &x) {
    ++res.evaluations;
    const double v = f(x);
    return std::isnan(v) ? INFINITY : v;
  };

  if (n == 0) {
    res.x = x0;
    res.value = eval(x0);
    res.converged = true;
    return res;
  }

  std::vector<std::vector<double>> pts(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step[i];
  std::vector<double> vals(n + 1);
  for (std::size_t i = 0; i <= n; ++i) vals[i] = eval(pts[i]);

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), trial(n), trial2(n);

  auto along = [&](const std::vector<double> &from, double t, std::vector<double> &out) {
    for (std::size_t j = 0; j < n; ++j) out[j] = centroid[j] + t * (from[j] - centroid[j]);
  };

  while (res.evaluations < opts.max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];

    const double spread = std::abs(vals[worst] - vals[best]);
    if (std::isfinite(vals[best]) &&
        spread <= opts.rel_tolerance * std::abs(vals[best]) + opts.abs_tolerance) {
      res.converged = true;
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < n; ++j) centroid[j] += pts[i][j] / static_cast<double>(n);
    }

    along(pts[worst], -1.0, trial);
    const double fr = eval(trial);
    if (fr < vals[best]) {
      along(pts[worst], -2.0, trial2);
      const double fe = eval(trial2);
      if (fe < fr) {
        pts[worst] = trial2;
        vals[worst] = fe;
      } else {
        pts[worst] = trial;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = trial;
      vals[worst] = fr;
      continue;
    }
    // Contraction: outside if the reflection improved on the worst point.
    const bool outside = fr < vals[worst];
    along(pts[worst], outside ? -0.5 : 0.5, trial2);
    const double fc = eval(trial2);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = trial2;
      vals[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t j = 0; j < n; ++j) pts[i][j] = pts[best][j] + 0.5 * (pts[i][j] - pts[best][j]);
      vals[i] = eval(pts[i]);
    }
  }

  const auto it = std::min_element(vals.begin(), vals.end());
  res.x = pts[static_cast<std::size_t>(it - vals.begin())];
  res.value = *it;
  return res;
}

double bisect(const std::function<double(double)> &g, double lo, double hi, int iterations) {
  double glo = g(lo);
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if ((gm < 0.0) == (glo < 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace repread
