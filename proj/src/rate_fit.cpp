#include "repread/rate_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "repread/poisson.hpp"

namespace repread {

namespace {

constexpr double kLogFloor = -690.0;  // ~log(1e-300)
constexpr double kMinPositive = 1e-9;

double safe_log(double p) { return p > 0.0 ? std::max(std::log(p), kLogFloor) : kLogFloor; }

std::vector<double> log_grid(double lo, double hi, int per_decade) {
  std::vector<double> g;
  const double a = std::log10(lo), b = std::log10(hi);
  const int steps = static_cast<int>(std::lround((b - a) * per_decade));
  for (int i = 0; i <= steps; ++i) g.push_back(std::pow(10.0, a + (b - a) * i / steps));
  return g;
}

// Interval endpoint along one coordinate where logL falls 0.5 below the
// optimum. direction = +1 searches upward, -1 downward.
double profile_edge(const std::function<double(double)> &drop, double at, int direction) {
  double inside = at;
  double outside = at;
  for (int k = 0; k < 60; ++k) {
    outside = direction > 0 ? outside * 2.0 : outside * 0.5;
    if (direction < 0 && outside < kMinPositive) return 0.0;
    if (drop(outside) > 0.5) break;
    inside = outside;
    if (k == 59) return direction > 0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  const double lo = std::log(std::min(inside, outside)), hi = std::log(std::max(inside, outside));
  return std::exp(bisect([&](double lx) { return drop(std::exp(lx)) - 0.5; }, lo, hi, 40));
}

}  // namespace

double log_likelihood(const ReadoutParams &params, const std::vector<ObservedHistogram> &data) {
  std::map<std::pair<int, long>, CountPmf> cache;
  double ll = 0.0;
  for (const ObservedHistogram &obs : data) {
    const auto key = std::make_pair(static_cast<int>(obs.initial), obs.repetitions);
    auto it = cache.find(key);
    if (it == cache.end()) {
      const ReadoutParams p = params.with_repetitions(obs.repetitions);
      long support = auto_support(p.lambda_bright * static_cast<double>(p.repetitions));
      for (const ObservedHistogram &o : data)
        if (o.repetitions == obs.repetitions) support = std::max(support, o.histogram.max_value());
      it = cache.emplace(key, count_distribution(p, obs.initial, support)).first;
    }
    const CountPmf &pmf = it->second;
    const Histogram &h = obs.histogram;
    for (std::size_t i = 0; i < h.counts().size(); ++i) {
      if (h.counts()[i] == 0) continue;
      ll += static_cast<double>(h.counts()[i]) * safe_log(pmf[h.offset() + static_cast<long>(i)]);
    }
  }
  return ll;
}

PositiveFitResult maximize_positive_likelihood(const PositiveFitProblem &problem,
                                               const FitOptions &opts) {
  const std::size_t n = problem.initial.size();
  std::vector<std::size_t> free_idx;
  for (std::size_t i = 0; i < n; ++i)
    if (!problem.fixed[i]) free_idx.push_back(i);

  int evaluations = 0;
  auto ll_at = [&](const std::vector<double> &values) {
    ++evaluations;
    return problem.log_likelihood(values);
  };

  PositiveFitResult out;
  out.initial_log_likelihood = ll_at(problem.initial);

  // Coarse log-grid pre-scan over the flagged free coordinates.
  std::vector<double> start = problem.initial;
  double start_ll = out.initial_log_likelihood;
  std::vector<std::size_t> grid_idx;
  for (std::size_t i : free_idx)
    if (problem.on_grid[i]) grid_idx.push_back(i);
  if (!grid_idx.empty()) {
    const std::vector<double> axis = log_grid(opts.grid_lo_hz, opts.grid_hi_hz, opts.grid_points_per_decade);
    std::vector<std::size_t> digit(grid_idx.size(), 0);
    std::vector<double> trial = problem.initial;
    while (true) {
      for (std::size_t k = 0; k < grid_idx.size(); ++k) trial[grid_idx[k]] = axis[digit[k]];
      const double v = ll_at(trial);
      if (v > start_ll) {
        start_ll = v;
        start = trial;
      }
      std::size_t k = 0;
      while (k < digit.size() && ++digit[k] == axis.size()) digit[k++] = 0;
      if (k == digit.size()) break;
    }
  }

  // Simplex refinement in log coordinates.
  auto to_values = [&](const std::vector<double> &logs) {
    std::vector<double> v = start;
    for (std::size_t k = 0; k < free_idx.size(); ++k)
      v[free_idx[k]] = std::max(std::exp(logs[k]), kMinPositive);
    return v;
  };
  std::vector<double> x0, step;
  for (std::size_t i : free_idx) {
    x0.push_back(std::log(std::max(start[i], kMinPositive)));
    step.push_back(0.5);
  }
  auto objective = [&](const std::vector<double> &logs) { return -ll_at(to_values(logs)); };

  SimplexOptions sopts = opts.simplex;
  SimplexResult sr = nelder_mead(objective, x0, step, sopts);
  if (sr.converged) {
    // One restart around the optimum guards against a collapsed simplex.
    std::vector<double> small(step.size(), 0.1);
    sopts.max_evaluations = std::max(0, opts.simplex.max_evaluations - sr.evaluations);
    const SimplexResult again = nelder_mead(objective, sr.x, small, sopts);
    if (again.value <= sr.value) sr = again;
    else sr.converged = again.converged;
  }

  out.values = to_values(sr.x);
  out.log_likelihood = -sr.value;
  if (out.log_likelihood < start_ll) {
    out.values = start;
    out.log_likelihood = start_ll;
  }
  out.converged = sr.converged;
  out.half_width.assign(n, 0.0);

  if (opts.profile_intervals && out.converged) {
    for (std::size_t i : free_idx) {
      auto drop = [&](double x) {
        std::vector<double> v = out.values;
        v[i] = x;
        return out.log_likelihood - ll_at(v);
      };
      const double at = out.values[i];
      const double upper = profile_edge(drop, at, +1);
      const double lower = profile_edge(drop, at, -1);
      out.half_width[i] = 0.5 * (upper - lower);
    }
  }
  out.evaluations = evaluations;
  return out;
}

RateFit fit_rates(const std::vector<ObservedHistogram> &data, const ReadoutParams &init,
                  const FitMask &mask, const FitOptions &opts) {
  init.validate();
  bool has_bright = false, has_dark = false;
  for (const ObservedHistogram &obs : data) {
    if (obs.repetitions < 1) throw InvalidParameter("histogram repetitions must be >= 1");
    (obs.initial == HiddenState::bright ? has_bright : has_dark) = true;
  }
  if (!has_bright || !has_dark)
    throw InvalidParameter("fit_rates needs at least one histogram per initial state");

  PositiveFitProblem problem;
  problem.initial = {init.gamma_bright_hz, init.gamma_dark_hz, init.lambda_bright, init.lambda_dark};
  problem.fixed.assign(mask.fixed.begin(), mask.fixed.end());
  problem.on_grid = {true, true, false, false};
  auto params_of = [&](const std::vector<double> &v) {
    ReadoutParams p = init;
    p.gamma_bright_hz = v[0];
    p.gamma_dark_hz = v[1];
    p.lambda_bright = v[2];
    p.lambda_dark = v[3];
    return p;
  };
  problem.log_likelihood = [&](const std::vector<double> &v) {
    if (v[2] < v[3]) return -std::numeric_limits<double>::infinity();
    return log_likelihood(params_of(v), data);
  };

  const PositiveFitResult r = maximize_positive_likelihood(problem, opts);
  RateFit fit;
  fit.estimate = params_of(r.values);
  fit.log_likelihood = r.log_likelihood;
  fit.initial_log_likelihood = r.initial_log_likelihood;
  std::copy(r.half_width.begin(), r.half_width.end(), fit.half_width.begin());
  fit.converged = r.converged;
  fit.evaluations = r.evaluations;
  if (!fit.converged)
    throw ConvergenceError("rate fit hit the evaluation cap (" +
                               std::to_string(opts.simplex.max_evaluations) + ")",
                           fit);
  return fit;
}

}  // namespace repread
