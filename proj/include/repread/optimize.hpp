#pragma once

#include <functional>
#include <vector>

namespace repread {

struct SimplexOptions {
  int max_evaluations = 5000;
  double rel_tolerance = 1e-6;  // on the spread of objective values
  double abs_tolerance = 1e-10;
};

struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Nelder-Mead minimization (standard reflection/expansion/contraction/shrink
/// coefficients). `step` sets the initial simplex edge along each axis.
SimplexResult nelder_mead(const std::function<double(const std::vector<double> &)> &f,
                          std::vector<double> x0, const std::vector<double> &step,
                          const SimplexOptions &opts = {});

/// Root of g on [lo, hi] by bisection; g(lo) and g(hi) must differ in sign.
double bisect(const std::function<double(double)> &g, double lo, double hi, int iterations = 60);

}  // namespace repread
