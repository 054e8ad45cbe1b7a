#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "constop/loss.hpp"
#include "constop/policy.hpp"
#include "constop/trajectory.hpp"

namespace constop {

enum class Correction { naive, ucb, ucb_union };

std::string correction_name(Correction c);
Correction correction_from_name(const std::string& name);

// A risk constraint: control `loss` at tolerance epsilon with confidence
// delta under the given finite-sample correction. Only the two correctness
// losses are valid targets; naive ignores delta.
struct RiskBudget {
  LossKind loss = LossKind::false_positive_upper;
  double epsilon = 0.0;
  double delta = 0.05;
  Correction correction = Correction::ucb;
};

void validate_budget(const RiskBudget& budget);

struct GridMode {
  enum class Kind { uniform, quantile };
  Kind kind = Kind::uniform;
  int count = 64;  // resolution (uniform) or quantile count
};

// Candidate parameters per signal: lambda values for the upper threshold,
// sigmoid sharpness c for the lower threshold. Lists are sorted ascending
// and duplicate-free.
struct CandidateGrid {
  std::map<std::string, std::vector<double>> upper;
  std::map<std::string, std::vector<double>> lower;
};

// Span of the default c grid, per token.
inline constexpr double kLowerGridMin = 1e-5;
inline constexpr double kLowerGridMax = 1e0;
inline constexpr int kLowerGridCount = 32;

// Upper candidates span the oriented signal values observed on the
// validation steps (uniform spacing or nearest-rank quantiles); lower
// candidates are log-spaced c values over [1e-5, 1], expressed per token so
// the same grid is meaningful across budgets.
CandidateGrid build_grid(const Dataset& validation, const std::vector<SignalSpec>& signals,
                         GridMode mode, int lower_count = kLowerGridCount);

// sqrt(ln(1/delta) / (2n)): Hoeffding upper-confidence margin for a fixed
// candidate on n samples.
double hoeffding_correction(std::size_t n, double delta);

// Empirical risk plus the correction implied by the budget's mode; the
// union variant replaces delta with delta/grid_size. Not clamped to 1.
double adjusted_risk_value(double empirical, std::size_t n, Correction correction,
                           double delta, std::size_t grid_size);
double adjusted_risk(const Dataset& validation, const StoppingPolicy& policy,
                     const SignalSpec& spec, const RiskBudget& budget,
                     std::size_t grid_size);

enum class Side { upper, lower };

// One evaluated candidate: empirical risk and efficiency-loss estimate on
// the validation set.
struct CandidateEval {
  std::string signal;
  double parameter = 0.0;
  double empirical = 0.0;
  double efficiency = 0.0;
};

struct CandidateTable {
  Side side = Side::upper;
  std::vector<CandidateEval> rows;
  std::size_t n_validation = 0;
  std::size_t grid_size = 0;  // |G|, total candidates
};

using PreparedBySignal = std::map<std::string, std::vector<PreparedTrajectory>>;

PreparedBySignal prepare_signals(const Dataset& dataset, const std::vector<SignalSpec>& signals,
                                 int workers = 1);

// Evaluates every (signal, parameter) candidate over the validation indices.
// For the lower side, dual_lambda_plus switches exits to the combined policy
// with the upper threshold fixed at that value (and capping the curve).
CandidateTable evaluate_candidates(const std::vector<SignalSpec>& signals,
                                   const PreparedBySignal& prepared,
                                   const std::vector<std::size_t>& indices,
                                   const CandidateGrid& grid, Side side,
                                   std::optional<double> dual_lambda_plus = std::nullopt,
                                   int workers = 1);

// Feasibility filter + efficiency argmin over an evaluated table. Ties break
// by lower adjusted risk, then the more conservative parameter (larger
// lambda / smaller c), then signal name.
std::optional<std::size_t> select_candidate(const CandidateTable& table, double epsilon,
                                            Correction correction, double delta);

// Upper-fixing rule used by the combined-threshold sweeps: the candidate
// with the smallest validation risk; ties prefer the smaller efficiency
// estimate, then the larger lambda.
std::optional<std::size_t> min_risk_candidate(const CandidateTable& table);

struct AuditRow {
  std::string signal;
  double parameter = 0.0;
  double empirical = 0.0;
  double adjusted_risk = 0.0;
  double efficiency = 0.0;
};

struct CalibrationOutcome {
  std::optional<std::pair<std::string, double>> selected;
  double empirical_risk = 0.0;
  double adjusted_risk = 0.0;
  double efficiency_estimate = 0.0;
  std::vector<AuditRow> feasible_set;
  std::optional<std::string> infeasible_reason;
  std::size_t grid_size = 0;
};

// Algorithm: enumerate candidates, keep those with adjusted risk <= epsilon,
// return the feasible candidate minimizing the efficiency-loss estimate.
// `efficiency` must pair with the budget's loss (upper with fp, lower with fn).
CalibrationOutcome calibrate(const Dataset& validation, const std::vector<SignalSpec>& signals,
                             const CandidateGrid& grid, const RiskBudget& budget,
                             LossKind efficiency, int workers = 1);

struct DualBudgets {
  double eps_plus = 0.0;
  double eps_minus = 0.0;
  double delta = 0.05;
};

enum class DualStage { none, upper, lower };

struct DualOutcome {
  std::optional<DualPolicy> policy;
  CalibrationOutcome upper_stage;
  CalibrationOutcome lower_stage;
  DualStage infeasible_stage = DualStage::none;
};

// Two-step combined calibration on one signal: pick lambda_plus against
// eps_plus (fp / eff_upper), then with the upper threshold active and
// capping the curve, pick c against eps_minus (fn / eff_lower).
DualOutcome calibrate_dual(const Dataset& validation, const SignalSpec& signal,
                           const CandidateGrid& upper_grid, const CandidateGrid& lower_grid,
                           const DualBudgets& budgets, Correction correction,
                           int workers = 1);

}  // namespace constop
