#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "constop/trajectory.hpp"

namespace constop {

enum class ExitTrigger { upper, lower, budget };

// Where a policy stopped on one trajectory.
struct ExitOutcome {
  int exit_step = 0;  // tau, 1-based
  ExitTrigger trigger = ExitTrigger::budget;
  std::int64_t tokens_used = 0;  // cum_tokens at tau
  bool correct_at_exit = false;
};

// Stop-and-answer rule: exit at the first step whose transformed signal is
// >= lambda_plus (non-strict).
struct UpperPolicy {
  std::string signal;
  double lambda_plus = 0.0;
};

// Stop-and-abstain rule: exit at the first step whose transformed signal
// falls strictly below the token-indexed sigmoid curve
//   lambda_minus(t; c) = cap * sigmoid(c * (omega_t - B/2)).
struct LowerPolicy {
  std::string signal;
  double c = 0.0;
  std::optional<std::int64_t> budget_tokens_override;  // defaults to trajectory budget
  std::optional<double> cap;                           // multiplies the curve
};

// Both rules on one monitored channel; the lower curve is capped by
// lambda_plus so the two thresholds never intersect.
struct DualPolicy {
  UpperPolicy upper;
  LowerPolicy lower;

  DualPolicy(UpperPolicy up, LowerPolicy low);
};

using StoppingPolicy = std::variant<UpperPolicy, LowerPolicy, DualPolicy>;

const std::string& policy_signal(const StoppingPolicy& policy);

// cap_or_1 * sigmoid(c * (cum_tokens - budget/2)), evaluated with the
// two-branch form so large |arguments| stay finite.
double sigmoid_threshold(std::int64_t cum_tokens, std::int64_t budget, double c,
                         std::optional<double> cap = std::nullopt);

// Oriented then smoothed series of the policy's monitored channel.
std::vector<double> transformed_series(const Trajectory& trajectory, const SignalSpec& spec);

// Per-trajectory data precomputed once per (trajectory, signal spec) so exit
// scans and losses are cheap under grid search.
struct PreparedTrajectory {
  std::vector<double> series;  // transformed signal, index 0 = step 1
  std::vector<std::int64_t> cum_tokens;
  std::vector<std::uint8_t> correct;
  std::vector<int> record_step;      // positions of strict prefix maxima (1-based)
  std::vector<double> record_value;  // strictly increasing
  std::vector<int> correct_suffix;   // [t] = # correct steps in t..T, 1-based, size T+2
  std::vector<int> incorrect_prefix; // [t] = # incorrect steps in 1..t, size T+1
  std::int64_t budget_tokens = 0;
  int first_correct = 0;  // 0 = never correct
  int T = 0;

  bool solvable() const { return first_correct > 0; }
};

PreparedTrajectory prepare_trajectory(const Trajectory& trajectory, const SignalSpec& spec);
std::vector<PreparedTrajectory> prepare_dataset(const Dataset& dataset, const SignalSpec& spec,
                                                int workers = 1);

// Exit searches on prepared data. The upper search binary-searches the
// prefix-maxima records; the lower search scans the sigmoid curve.
std::optional<int> prepared_upper_exit(const PreparedTrajectory& p, double lambda_plus);
std::optional<int> prepared_lower_exit(const PreparedTrajectory& p, double c,
                                       std::optional<double> cap,
                                       std::optional<std::int64_t> budget_override);

// min{tau+, tau-, T}; a tie between the thresholds resolves to upper (emit
// rather than abstain). With cap = lambda_plus the tie cannot occur.
ExitOutcome combine_exits(std::optional<int> upper, std::optional<int> lower,
                          const PreparedTrajectory& p);
ExitOutcome prepared_exit(const PreparedTrajectory& p, const StoppingPolicy& policy);

// Spec'd per-trajectory operations; thin wrappers over the prepared path.
std::optional<int> upper_exit(const Trajectory& trajectory, const UpperPolicy& policy,
                              const SignalSpec& spec);
std::optional<int> lower_exit(const Trajectory& trajectory, const LowerPolicy& policy,
                              const SignalSpec& spec);
ExitOutcome dual_exit(const Trajectory& trajectory, const DualPolicy& policy,
                      const SignalSpec& spec);
ExitOutcome evaluate_exit(const Trajectory& trajectory, const StoppingPolicy& policy,
                          const SignalSpec& spec);

}  // namespace constop
