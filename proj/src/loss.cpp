#include "constop/loss.hpp"

#include <algorithm>
#include <stdexcept>

#include "constop/parallel.hpp"

namespace constop {

std::string loss_kind_name(LossKind kind) {
  switch (kind) {
    case LossKind::false_positive_upper: return "false_positive_upper";
    case LossKind::false_negative_lower: return "false_negative_lower";
    case LossKind::efficiency_upper: return "efficiency_upper";
    case LossKind::efficiency_lower: return "efficiency_lower";
  }
  return "?";
}

LossKind loss_kind_from_name(const std::string& name) {
  if (name == "false_positive_upper") return LossKind::false_positive_upper;
  if (name == "false_negative_lower") return LossKind::false_negative_lower;
  if (name == "efficiency_upper") return LossKind::efficiency_upper;
  if (name == "efficiency_lower") return LossKind::efficiency_lower;
  throw std::invalid_argument("unknown loss kind: " + name);
}

double fp_loss(const Trajectory&, const ExitOutcome& outcome) {
  return (outcome.trigger == ExitTrigger::upper && !outcome.correct_at_exit) ? 1.0 : 0.0;
}

double fn_loss(const Trajectory& trajectory, const ExitOutcome& outcome) {
  if (outcome.trigger != ExitTrigger::lower) return 0.0;
  const int T = trajectory.step_count();
  const int tau = outcome.exit_step;
  int correct = 0;
  for (int t = tau; t <= T; ++t) {
    if (trajectory.steps[t - 1].correct) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(T - tau + 1);
}

double eff_upper_loss(const Trajectory& trajectory, const ExitOutcome& outcome) {
  const int first_correct = trajectory.first_correct_step();
  if (first_correct == 0) return 0.0;
  const int overshoot = std::max(0, outcome.exit_step - first_correct);
  return static_cast<double>(overshoot) / static_cast<double>(trajectory.step_count());
}

double eff_lower_loss(const Trajectory& trajectory, const ExitOutcome& outcome) {
  int incorrect = 0;
  for (int t = 1; t <= outcome.exit_step; ++t) {
    if (!trajectory.steps[t - 1].correct) ++incorrect;
  }
  return static_cast<double>(incorrect) / static_cast<double>(trajectory.step_count());
}

double loss_value(LossKind kind, const Trajectory& trajectory, const ExitOutcome& outcome) {
  switch (kind) {
    case LossKind::false_positive_upper: return fp_loss(trajectory, outcome);
    case LossKind::false_negative_lower: return fn_loss(trajectory, outcome);
    case LossKind::efficiency_upper: return eff_upper_loss(trajectory, outcome);
    case LossKind::efficiency_lower: return eff_lower_loss(trajectory, outcome);
  }
  throw std::logic_error("unreachable loss kind");
}

double prepared_loss(LossKind kind, const PreparedTrajectory& p, const ExitOutcome& outcome) {
  const int tau = outcome.exit_step;
  switch (kind) {
    case LossKind::false_positive_upper:
      return (outcome.trigger == ExitTrigger::upper && !outcome.correct_at_exit) ? 1.0 : 0.0;
    case LossKind::false_negative_lower:
      if (outcome.trigger != ExitTrigger::lower) return 0.0;
      return static_cast<double>(p.correct_suffix[tau]) / static_cast<double>(p.T - tau + 1);
    case LossKind::efficiency_upper:
      if (p.first_correct == 0) return 0.0;
      return static_cast<double>(std::max(0, tau - p.first_correct)) /
             static_cast<double>(p.T);
    case LossKind::efficiency_lower:
      return static_cast<double>(p.incorrect_prefix[tau]) / static_cast<double>(p.T);
  }
  throw std::logic_error("unreachable loss kind");
}

double stable_mean(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("mean of empty set");
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double empirical_risk(const Dataset& dataset, const StoppingPolicy& policy,
                      const SignalSpec& spec, LossKind loss, int workers) {
  if (dataset.size() == 0) throw std::invalid_argument("empirical_risk: empty dataset");
  if (!dataset_has_signal(dataset, policy_signal(policy))) {
    throw std::invalid_argument("empirical_risk: unknown signal '" + policy_signal(policy) +
                                "'");
  }
  std::vector<double> losses(dataset.size());
  parallel_for(dataset.size(), workers, [&](std::size_t i) {
    const PreparedTrajectory p = prepare_trajectory(dataset.trajectories[i], spec);
    losses[i] = prepared_loss(loss, p, prepared_exit(p, policy));
  });
  return stable_mean(std::move(losses));
}

}  // namespace constop
