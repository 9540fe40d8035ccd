#pragma once

#include <array>
#include <functional>
#include <vector>

#include "repread/error.hpp"
#include "repread/histogram.hpp"
#include "repread/optimize.hpp"
#include "repread/readout.hpp"

namespace repread {

/// A measured (or synthetic) count histogram with the block length and the
/// state it was prepared in.
struct ObservedHistogram {
  Histogram histogram;
  HiddenState initial = HiddenState::bright;
  long repetitions = 1;
};

enum class FitParameter : std::size_t { gamma_bright = 0, gamma_dark, lambda_bright, lambda_dark };
inline constexpr std::size_t kFitParameters = 4;

/// Fields held at their initial value during the fit.
struct FitMask {
  std::array<bool, kFitParameters> fixed{};

  bool is_fixed(FitParameter p) const { return fixed[static_cast<std::size_t>(p)]; }
  FitMask &fix(FitParameter p) {
    fixed[static_cast<std::size_t>(p)] = true;
    return *this;
  }
};

struct RateFit {
  ReadoutParams estimate;
  double log_likelihood = 0.0;
  double initial_log_likelihood = 0.0;
  // Half-widths of the Delta logL = 0.5 interval along each parameter, zero
  // for fixed fields, infinity where the likelihood never drops by 0.5.
  std::array<double, kFitParameters> half_width{};
  bool converged = false;
  int evaluations = 0;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string &what, RateFit best)
      : Error(ErrorKind::convergence, what), best_(std::move(best)) {}
  const RateFit &best_so_far() const { return best_; }

 private:
  RateFit best_;
};

struct FitOptions {
  SimplexOptions simplex;
  double grid_lo_hz = 0.1;
  double grid_hi_hz = 1e4;
  int grid_points_per_decade = 5;
  bool profile_intervals = true;
};

double log_likelihood(const ReadoutParams &params, const std::vector<ObservedHistogram> &data);

/// Maximum-likelihood fit of switching and emission rates. A coarse log-grid
/// over the free switching rates seeds a simplex search in log-parameters.
/// Throws ConvergenceError (carrying the best point) at the evaluation cap.
RateFit fit_rates(const std::vector<ObservedHistogram> &data, const ReadoutParams &init,
                  const FitMask &mask, const FitOptions &opts = {});

// Shared machinery for likelihoods over strictly positive parameters.
struct PositiveFitProblem {
  std::vector<double> initial;
  std::vector<bool> fixed;
  std::vector<bool> on_grid;  // included in the coarse log-grid pre-scan
  std::function<double(const std::vector<double> &)> log_likelihood;
};

struct PositiveFitResult {
  std::vector<double> values;
  double log_likelihood = 0.0;
  double initial_log_likelihood = 0.0;
  std::vector<double> half_width;
  bool converged = false;
  int evaluations = 0;
};

PositiveFitResult maximize_positive_likelihood(const PositiveFitProblem &problem,
                                               const FitOptions &opts);

}  // namespace repread
