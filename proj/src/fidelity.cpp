#include "repread/fidelity.hpp"

#include <algorithm>
#include <string>

#include "repread/error.hpp"

namespace repread {

namespace {

// Prefix sums over a pmf support for O(1) tail queries.
class CumulativePmf {
 public:
  explicit CumulativePmf(const DiscretePmf &pmf) : offset_(pmf.offset), prefix_(pmf.p.size() + 1, 0.0) {
    for (std::size_t i = 0; i < pmf.p.size(); ++i) prefix_[i + 1] = prefix_[i] + pmf.p[i];
  }

  double le(long x) const { return prefix_[clamp(x - offset_ + 1)]; }
  double ge(long x) const { return prefix_.back() - prefix_[clamp(x - offset_)]; }

 private:
  std::size_t clamp(long i) const {
    return static_cast<std::size_t>(std::clamp<long>(i, 0, static_cast<long>(prefix_.size()) - 1));
  }

  long offset_;
  std::vector<double> prefix_;
};

FidelityPoint point_from_masses(double bright_right, double bright_wrong, double dark_right,
                                double dark_wrong, const ThresholdPolicy &policy,
                                long repetitions) {
  const double bright_conclusive = bright_right + bright_wrong;
  const double dark_conclusive = dark_right + dark_wrong;
  if (!(bright_conclusive > 0.0) || !(dark_conclusive > 0.0))
    throw EmptyConclusiveRegion("policy (" + std::to_string(policy.dark_max) + ", " +
                                std::to_string(policy.bright_min) +
                                ") leaves a state with no conclusive outcome");
  FidelityPoint fp;
  fp.repetitions = repetitions;
  fp.policy = policy;
  fp.f_bright = std::clamp(bright_right / bright_conclusive, 0.0, 1.0);
  fp.f_dark = std::clamp(dark_right / dark_conclusive, 0.0, 1.0);
  fp.f_avg = 0.5 * (fp.f_bright + fp.f_dark);
  fp.eta = policy.single_threshold() ? 1.0
                                     : std::clamp(0.5 * (bright_conclusive + dark_conclusive), 0.0, 1.0);
  return fp;
}

void check_policy(const ThresholdPolicy &policy) {
  if (policy.bright_min <= policy.dark_max)
    throw EmptyConclusiveRegion("bright_min must exceed dark_max");
}

FidelityPoint evaluate(const CumulativePmf &bright, const CumulativePmf &dark,
                       const ThresholdPolicy &policy, long repetitions) {
  check_policy(policy);
  return point_from_masses(bright.ge(policy.bright_min), bright.le(policy.dark_max),
                           dark.le(policy.dark_max), dark.ge(policy.bright_min), policy,
                           repetitions);
}

}  // namespace

FidelityPoint evaluate_policy(const DiscretePmf &given_bright, const DiscretePmf &given_dark,
                              const ThresholdPolicy &policy, long repetitions) {
  return evaluate(CumulativePmf(given_bright), CumulativePmf(given_dark), policy, repetitions);
}

FidelityPoint readout_fidelity(const ReadoutParams &params, const ThresholdPolicy &policy) {
  check_policy(policy);
  const CountPmf bright = count_distribution(params, HiddenState::bright);
  const CountPmf dark = count_distribution(params, HiddenState::dark);
  return evaluate_policy(bright.marginal, dark.marginal, policy, params.repetitions);
}

std::vector<ThresholdPolicy> PolicyGrid::policies() const {
  std::vector<ThresholdPolicy> out;
  for (long d = dark_max_lo; d <= dark_max_hi; ++d)
    for (long b = d + 1; b <= bright_min_hi; ++b) out.push_back({d, b});
  return out;
}

std::vector<FidelityPoint> pareto_front(const std::vector<FidelityPoint> &points) {
  std::vector<FidelityPoint> sorted = points;
  std::sort(sorted.begin(), sorted.end(), [](const FidelityPoint &a, const FidelityPoint &b) {
    if (a.eta != b.eta) return a.eta > b.eta;
    return a.infidelity() < b.infidelity();
  });
  std::vector<FidelityPoint> front;
  for (const FidelityPoint &p : sorted)
    if (front.empty() || p.infidelity() < front.back().infidelity()) front.push_back(p);
  std::reverse(front.begin(), front.end());
  return front;
}

FidelityScan fidelity_scan(const ReadoutParams &params, const std::vector<long> &n_list,
                           const PolicyGrid &grid) {
  const std::vector<ThresholdPolicy> policies = grid.policies();
  if (n_list.empty() || policies.empty()) throw InvalidParameter("empty scan grid");
  FidelityScan scan;
  for (long n : n_list) {
    const ReadoutParams p = params.with_repetitions(n);
    const CumulativePmf bright(count_distribution(p, HiddenState::bright).marginal);
    const CumulativePmf dark(count_distribution(p, HiddenState::dark).marginal);
    for (const ThresholdPolicy &policy : policies) {
      try {
        scan.points.push_back(evaluate(bright, dark, policy, n));
      } catch (const EmptyConclusiveRegion &) {
      }
    }
  }
  scan.pareto = pareto_front(scan.points);
  return scan;
}

PreparationResult preparation_fidelity(const ReadoutParams &params, const CountCondition &condition) {
  if (condition.n_max < condition.n_min || condition.n_max < 0)
    throw InsufficientStatistics("empty count window");
  std::array<double, 2> mass{};
  for (HiddenState start : {HiddenState::bright, HiddenState::dark}) {
    const CountPmf pmf = count_distribution(params, start);
    for (HiddenState end : {HiddenState::bright, HiddenState::dark}) {
      const auto &row = pmf.joint[idx(end)];
      const long hi = std::min<long>(condition.n_max, static_cast<long>(row.size()) - 1);
      for (long n = std::max<long>(condition.n_min, 0); n <= hi; ++n) mass[idx(end)] += 0.5 * row[n];
    }
  }
  const double total = mass[0] + mass[1];
  if (!(total > 0.0)) throw InsufficientStatistics("conditioning window has zero probability");
  PreparationResult r;
  r.p_bright = mass[idx(HiddenState::bright)] / total;
  r.p_dark = mass[idx(HiddenState::dark)] / total;
  r.p_condition = total;
  return r;
}

}  // namespace repread
