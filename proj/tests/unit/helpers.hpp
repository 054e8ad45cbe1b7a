#pragma once

#include <map>
#include <string>
#include <vector>

#include "constop/trajectory.hpp"

namespace constop::test {

// Builds a trajectory with one "s" channel; tokens default to 100 per step.
inline Trajectory make_trajectory(const std::string& id,
                                  const std::vector<double>& signal,
                                  const std::vector<int>& correct,
                                  std::int64_t tokens_per_step = 100,
                                  std::int64_t budget_tokens = 0) {
  Trajectory traj;
  traj.id = id;
  traj.budget_tokens = budget_tokens > 0
                           ? budget_tokens
                           : static_cast<std::int64_t>(signal.size()) * tokens_per_step;
  for (std::size_t i = 0; i < signal.size(); ++i) {
    StepRecord step;
    step.step_index = static_cast<int>(i) + 1;
    step.cum_tokens = static_cast<std::int64_t>(i + 1) * tokens_per_step;
    step.raw_signals["s"] = signal[i];
    step.correct = correct[i] != 0;
    traj.steps.push_back(step);
  }
  return traj;
}

inline Dataset make_dataset(std::vector<Trajectory> trajectories) {
  Dataset ds;
  ds.trajectories = std::move(trajectories);
  ds.signal_catalog = {"s"};
  return ds;
}

inline SignalSpec plain_spec(const std::string& name = "s") {
  return SignalSpec{name, Orientation::higher_confident, Transform::identity()};
}

}  // namespace constop::test
