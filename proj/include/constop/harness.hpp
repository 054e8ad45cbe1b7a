#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "constop/calibrate.hpp"
#include "constop/trajectory.hpp"

namespace constop {

// The two risk sides a sweep can target.
enum class RiskSide { upper_fp, lower_fn };

enum class EfficiencyMode { upper_only, lower_only, dual, fixed_token_budget };

// How the combined-threshold sweep fixes the upper threshold before
// sweeping the lower-side epsilon: at the smallest-validation-risk
// candidate, or by calibrating it against eps_plus.
enum class DualUpperRule { min_validation_risk, calibrated };

struct SweepSpec {
  std::vector<double> epsilons;  // empty = 0.00..1.00 step 0.01
  int splits = 40;
  std::size_t validation_size = 50;
  std::vector<Correction> corrections = {Correction::ucb};
  std::uint64_t seed = 0;
  // Plumbing knobs beyond the protocol itself.
  std::vector<SignalSpec> signals;  // empty = every catalog channel, defaults
  GridMode grid;
  int lower_grid_count = kLowerGridCount;
  double delta = 0.05;
  DualUpperRule dual_upper = DualUpperRule::min_validation_risk;
  double eps_plus = 0.1;  // only for DualUpperRule::calibrated
  int workers = 0;        // 0 = default_workers()
};

std::vector<double> default_epsilons();

// One calibrate-deploy cell. Infeasible cells keep signal_selected = "none"
// and NaN metrics; they are first-class rows, never dropped.
struct SweepRow {
  double epsilon = 0.0;
  std::string correction;
  std::uint64_t split_seed = 0;
  std::string signal_selected;
  double parameter = 0.0;
  double validation_risk = 0.0;
  double test_risk = 0.0;
  double test_efficiency = 0.0;
  std::int64_t total_tokens = 0;
  double accuracy = 0.0;
  double abstention_fraction = 0.0;
  // upper/lower/budget trigger counts, split by derived solvability.
  std::int64_t triggers_upper_solvable = 0;
  std::int64_t triggers_upper_unsolvable = 0;
  std::int64_t triggers_lower_solvable = 0;
  std::int64_t triggers_lower_unsolvable = 0;
  std::int64_t triggers_budget_solvable = 0;
  std::int64_t triggers_budget_unsolvable = 0;
  double accuracy_unabstained = 0.0;  // abstained instances excluded
  double lambda_plus = 0.0;           // fixed upper threshold on dual rows

  bool feasible() const { return signal_selected != "none"; }
};

// Calibrate on a fresh validation draw per split, deploy on the held-out
// test side, one row per (epsilon, correction, split). Rows are ordered by
// (epsilon, correction, split) regardless of worker count.
std::vector<SweepRow> coverage_sweep(const Dataset& dataset, const SweepSpec& spec,
                                     RiskSide side);

// Accuracy/token trade-off per epsilon for a stopping mode. Abstained
// instances count as wrong in `accuracy`; fixed_token_budget sweeps uniform
// step cutoffs (parameter = cutoff step) as the baseline.
std::vector<SweepRow> efficiency_sweep(const Dataset& dataset, const SweepSpec& spec,
                                       EfficiencyMode mode);

// Calibrates on draws from validation_source and deploys on the entire
// test_source; the two datasets never mix.
std::vector<SweepRow> ablation_shift(const Dataset& validation_source,
                                     const Dataset& test_source, const SweepSpec& spec,
                                     RiskSide side);

// Representative operating point: the row at the second-highest distinct
// accuracy (ties resolved toward fewer total tokens).
std::optional<SweepRow> pick_operating_point(const std::vector<SweepRow>& rows);

extern const char* const kSweepCsvHeader;
void write_rows_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path);
std::vector<SweepRow> read_rows_csv(const std::filesystem::path& path);

// Per-(epsilon, correction) aggregate across splits.
struct SweepSummary {
  double epsilon = 0.0;
  std::string correction;
  std::size_t rows = 0;
  std::size_t feasible = 0;
  double mean_test_risk = 0.0;
  double stdev_test_risk = 0.0;
  double violation_fraction = 0.0;  // feasible rows with test_risk > epsilon, over all rows
  double mean_accuracy = 0.0;
  double mean_total_tokens = 0.0;
  double mean_abstention = 0.0;
};

std::vector<SweepSummary> summarize(const std::vector<SweepRow>& rows);
void write_summary_csv(const std::vector<SweepSummary>& summaries,
                       const std::filesystem::path& path);

// JSON manifest line describing a sweep invocation (spec + input digests).
std::string manifest_record(const std::string& kind, const SweepSpec& spec,
                            const std::vector<std::pair<std::string, std::string>>& inputs,
                            std::size_t row_count);

}  // namespace constop
