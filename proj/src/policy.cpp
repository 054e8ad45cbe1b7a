#include "constop/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "constop/parallel.hpp"

namespace constop {

DualPolicy::DualPolicy(UpperPolicy up, LowerPolicy low)
    : upper(std::move(up)), lower(std::move(low)) {
  if (lower.signal != upper.signal) {
    throw std::invalid_argument("dual policy must monitor a single signal");
  }
  lower.cap = upper.lambda_plus;  // thresholds never intersect
}

const std::string& policy_signal(const StoppingPolicy& policy) {
  return std::visit([](const auto& p) -> const std::string& {
    if constexpr (std::is_same_v<std::decay_t<decltype(p)>, DualPolicy>) {
      return p.upper.signal;
    } else {
      return p.signal;
    }
  }, policy);
}

double sigmoid_threshold(std::int64_t cum_tokens, std::int64_t budget, double c,
                         std::optional<double> cap) {
  const double z = c * (static_cast<double>(cum_tokens) - 0.5 * static_cast<double>(budget));
  double s;
  if (z >= 0.0) {
    s = 1.0 / (1.0 + std::exp(-z));
  } else {
    const double e = std::exp(z);
    s = e / (1.0 + e);
  }
  return cap ? *cap * s : s;
}

std::vector<double> transformed_series(const Trajectory& trajectory, const SignalSpec& spec) {
  return smooth(orient(raw_series(trajectory, spec.name), spec), spec.transform);
}

PreparedTrajectory prepare_trajectory(const Trajectory& trajectory, const SignalSpec& spec) {
  PreparedTrajectory p;
  p.series = transformed_series(trajectory, spec);
  p.T = trajectory.step_count();
  p.budget_tokens = trajectory.budget_tokens;
  p.cum_tokens.reserve(p.T);
  p.correct.reserve(p.T);
  for (const auto& step : trajectory.steps) {
    p.cum_tokens.push_back(step.cum_tokens);
    p.correct.push_back(step.correct ? 1 : 0);
  }
  p.first_correct = trajectory.first_correct_step();

  p.correct_suffix.assign(static_cast<std::size_t>(p.T) + 2, 0);
  for (int t = p.T; t >= 1; --t) {
    p.correct_suffix[t] = p.correct_suffix[t + 1] + (p.correct[t - 1] ? 1 : 0);
  }
  p.incorrect_prefix.assign(static_cast<std::size_t>(p.T) + 1, 0);
  for (int t = 1; t <= p.T; ++t) {
    p.incorrect_prefix[t] = p.incorrect_prefix[t - 1] + (p.correct[t - 1] ? 0 : 1);
  }

  double running_max = -std::numeric_limits<double>::infinity();
  for (int t = 1; t <= p.T; ++t) {
    const double v = p.series[t - 1];
    if (v > running_max) {
      running_max = v;
      p.record_step.push_back(t);
      p.record_value.push_back(v);
    }
  }
  return p;
}

std::vector<PreparedTrajectory> prepare_dataset(const Dataset& dataset, const SignalSpec& spec,
                                                int workers) {
  std::vector<PreparedTrajectory> out(dataset.size());
  parallel_for(dataset.size(), workers, [&](std::size_t i) {
    out[i] = prepare_trajectory(dataset.trajectories[i], spec);
  });
  return out;
}

std::optional<int> prepared_upper_exit(const PreparedTrajectory& p, double lambda_plus) {
  // First step with series >= lambda is the first prefix-maximum record
  // >= lambda; record_value is strictly increasing.
  const auto it =
      std::lower_bound(p.record_value.begin(), p.record_value.end(), lambda_plus);
  if (it == p.record_value.end()) return std::nullopt;
  return p.record_step[static_cast<std::size_t>(it - p.record_value.begin())];
}

std::optional<int> prepared_lower_exit(const PreparedTrajectory& p, double c,
                                       std::optional<double> cap,
                                       std::optional<std::int64_t> budget_override) {
  const std::int64_t budget = budget_override.value_or(p.budget_tokens);
  for (int t = 1; t <= p.T; ++t) {
    const double curve = sigmoid_threshold(p.cum_tokens[t - 1], budget, c, cap);
    if (p.series[t - 1] < curve) return t;  // strict per the exit rule
  }
  return std::nullopt;
}

ExitOutcome combine_exits(std::optional<int> upper, std::optional<int> lower,
                          const PreparedTrajectory& p) {
  ExitOutcome out;
  const int tau_plus = upper.value_or(p.T + 1);
  const int tau_minus = lower.value_or(p.T + 1);
  if (tau_plus <= tau_minus && tau_plus <= p.T) {
    out.exit_step = tau_plus;  // ties resolve to upper
    out.trigger = ExitTrigger::upper;
  } else if (tau_minus <= p.T) {
    out.exit_step = tau_minus;
    out.trigger = ExitTrigger::lower;
  } else {
    out.exit_step = p.T;
    out.trigger = ExitTrigger::budget;
  }
  out.tokens_used = p.cum_tokens[out.exit_step - 1];
  out.correct_at_exit = p.correct[out.exit_step - 1] != 0;
  return out;
}

ExitOutcome prepared_exit(const PreparedTrajectory& p, const StoppingPolicy& policy) {
  return std::visit([&](const auto& pol) -> ExitOutcome {
    using P = std::decay_t<decltype(pol)>;
    if constexpr (std::is_same_v<P, UpperPolicy>) {
      return combine_exits(prepared_upper_exit(p, pol.lambda_plus), std::nullopt, p);
    } else if constexpr (std::is_same_v<P, LowerPolicy>) {
      return combine_exits(std::nullopt,
                           prepared_lower_exit(p, pol.c, pol.cap, pol.budget_tokens_override),
                           p);
    } else {
      return combine_exits(prepared_upper_exit(p, pol.upper.lambda_plus),
                           prepared_lower_exit(p, pol.lower.c, pol.lower.cap,
                                               pol.lower.budget_tokens_override),
                           p);
    }
  }, policy);
}

std::optional<int> upper_exit(const Trajectory& trajectory, const UpperPolicy& policy,
                              const SignalSpec& spec) {
  if (spec.name != policy.signal) {
    throw std::invalid_argument("signal spec does not match policy signal");
  }
  return prepared_upper_exit(prepare_trajectory(trajectory, spec), policy.lambda_plus);
}

std::optional<int> lower_exit(const Trajectory& trajectory, const LowerPolicy& policy,
                              const SignalSpec& spec) {
  if (spec.name != policy.signal) {
    throw std::invalid_argument("signal spec does not match policy signal");
  }
  return prepared_lower_exit(prepare_trajectory(trajectory, spec), policy.c, policy.cap,
                             policy.budget_tokens_override);
}

ExitOutcome dual_exit(const Trajectory& trajectory, const DualPolicy& policy,
                      const SignalSpec& spec) {
  return evaluate_exit(trajectory, StoppingPolicy{policy}, spec);
}

ExitOutcome evaluate_exit(const Trajectory& trajectory, const StoppingPolicy& policy,
                          const SignalSpec& spec) {
  if (spec.name != policy_signal(policy)) {
    throw std::invalid_argument("signal spec does not match policy signal");
  }
  return prepared_exit(prepare_trajectory(trajectory, spec), policy);
}

}  // namespace constop
