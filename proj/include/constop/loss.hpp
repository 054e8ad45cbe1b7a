#pragma once

#include <string>
#include <vector>

#include "constop/policy.hpp"
#include "constop/trajectory.hpp"

namespace constop {

enum class LossKind {
  false_positive_upper,
  false_negative_lower,
  efficiency_upper,
  efficiency_lower,
};

std::string loss_kind_name(LossKind kind);
LossKind loss_kind_from_name(const std::string& name);

// The four instance-wise losses, each in [0, 1], evaluated at an exit
// outcome produced on the same trajectory.

// 1 iff the upper threshold fired and the emitted answer is wrong.
double fp_loss(const Trajectory& trajectory, const ExitOutcome& outcome);

// Future-correctness mass forfeited by abstaining: fraction of correct
// steps among tau..T when the lower threshold fired, else 0.
double fn_loss(const Trajectory& trajectory, const ExitOutcome& outcome);

// Normalized overshoot past the first correct step: max(0, tau - t') / T.
// Never-correct trajectories incur 0 here; their waste is charged by
// eff_lower_loss instead.
double eff_upper_loss(const Trajectory& trajectory, const ExitOutcome& outcome);

// Fraction of the step budget spent on incorrect steps up to exit:
// (# incorrect among 1..tau) / T.
double eff_lower_loss(const Trajectory& trajectory, const ExitOutcome& outcome);

double loss_value(LossKind kind, const Trajectory& trajectory, const ExitOutcome& outcome);

// Same losses on prepared data, O(1) via the precomputed counts.
double prepared_loss(LossKind kind, const PreparedTrajectory& p, const ExitOutcome& outcome);

// Mean with a sorted reduction: the result depends only on the multiset of
// values, so it is reproducible under permutation and parallel evaluation.
double stable_mean(std::vector<double> values);

// Mean per-trajectory loss at each trajectory's policy-induced exit.
double empirical_risk(const Dataset& dataset, const StoppingPolicy& policy,
                      const SignalSpec& spec, LossKind loss, int workers = 1);

}  // namespace constop
