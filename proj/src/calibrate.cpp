#include "constop/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "constop/parallel.hpp"

namespace constop {

std::string correction_name(Correction c) {
  switch (c) {
    case Correction::naive: return "naive";
    case Correction::ucb: return "ucb";
    case Correction::ucb_union: return "ucb_union";
  }
  return "?";
}

Correction correction_from_name(const std::string& name) {
  if (name == "naive") return Correction::naive;
  if (name == "ucb") return Correction::ucb;
  if (name == "ucb_union" || name == "ucb-union") return Correction::ucb_union;
  throw std::invalid_argument("unknown correction: " + name);
}

void validate_budget(const RiskBudget& budget) {
  if (budget.loss != LossKind::false_positive_upper &&
      budget.loss != LossKind::false_negative_lower) {
    throw std::invalid_argument("risk budget must target a correctness loss");
  }
  if (!(budget.epsilon >= 0.0 && budget.epsilon <= 1.0)) {
    throw std::invalid_argument("epsilon must lie in [0, 1]");
  }
  if (budget.correction != Correction::naive &&
      !(budget.delta > 0.0 && budget.delta < 1.0)) {
    throw std::invalid_argument("delta must lie in (0, 1)");
  }
}

CandidateGrid build_grid(const Dataset& validation, const std::vector<SignalSpec>& signals,
                         GridMode mode, int lower_count) {
  if (validation.size() == 0) throw std::invalid_argument("build_grid: empty validation set");
  if (mode.kind == GridMode::Kind::uniform && mode.count < 2) {
    throw std::invalid_argument("build_grid: uniform resolution must be >= 2");
  }
  if (mode.kind == GridMode::Kind::quantile && mode.count < 1) {
    throw std::invalid_argument("build_grid: quantile count must be >= 1");
  }
  if (lower_count < 2) throw std::invalid_argument("build_grid: lower grid count must be >= 2");

  CandidateGrid grid;
  for (const SignalSpec& spec : signals) {
    std::vector<double> values;
    for (const Trajectory& traj : validation.trajectories) {
      const std::vector<double> oriented = orient(raw_series(traj, spec.name), spec);
      values.insert(values.end(), oriented.begin(), oriented.end());
    }
    std::vector<double> candidates;
    if (mode.kind == GridMode::Kind::uniform) {
      const auto [mn_it, mx_it] = std::minmax_element(values.begin(), values.end());
      const double mn = *mn_it;
      const double mx = *mx_it;
      if (mn == mx) {
        candidates.push_back(mn);  // degenerate span
      } else {
        candidates.reserve(static_cast<std::size_t>(mode.count));
        for (int i = 0; i < mode.count; ++i) {
          candidates.push_back(i + 1 == mode.count
                                   ? mx
                                   : mn + (mx - mn) * static_cast<double>(i) /
                                             static_cast<double>(mode.count - 1));
        }
      }
    } else {
      // Nearest-rank (upper) quantiles at i/count for i = 1..count.
      std::sort(values.begin(), values.end());
      const std::size_t n = values.size();
      for (int i = 1; i <= mode.count; ++i) {
        const std::size_t rank = (static_cast<std::size_t>(i) * n + static_cast<std::size_t>(mode.count) - 1) /
                                 static_cast<std::size_t>(mode.count);
        candidates.push_back(values[std::max<std::size_t>(rank, 1) - 1]);
      }
      std::sort(candidates.begin(), candidates.end());
    }
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    grid.upper[spec.name] = std::move(candidates);

    std::vector<double> c_values;
    c_values.reserve(static_cast<std::size_t>(lower_count));
    const double log_min = std::log10(kLowerGridMin);
    const double log_max = std::log10(kLowerGridMax);
    for (int i = 0; i < lower_count; ++i) {
      const double f = static_cast<double>(i) / static_cast<double>(lower_count - 1);
      c_values.push_back(std::pow(10.0, log_min + (log_max - log_min) * f));
    }
    grid.lower[spec.name] = std::move(c_values);
  }
  return grid;
}

double hoeffding_correction(std::size_t n, double delta) {
  if (n == 0) throw std::invalid_argument("hoeffding_correction: n must be positive");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("hoeffding_correction: delta must lie in (0, 1)");
  }
  return std::sqrt(std::log(1.0 / delta) / (2.0 * static_cast<double>(n)));
}

double adjusted_risk_value(double empirical, std::size_t n, Correction correction,
                           double delta, std::size_t grid_size) {
  switch (correction) {
    case Correction::naive:
      return empirical;
    case Correction::ucb:
      return empirical + hoeffding_correction(n, delta);
    case Correction::ucb_union:
      if (grid_size == 0) throw std::invalid_argument("ucb_union needs a positive grid size");
      return empirical + hoeffding_correction(n, delta / static_cast<double>(grid_size));
  }
  throw std::logic_error("unreachable correction");
}

double adjusted_risk(const Dataset& validation, const StoppingPolicy& policy,
                     const SignalSpec& spec, const RiskBudget& budget,
                     std::size_t grid_size) {
  if (validation.size() == 0) throw std::invalid_argument("adjusted_risk: empty validation set");
  const double empirical = empirical_risk(validation, policy, spec, budget.loss);
  return adjusted_risk_value(empirical, validation.size(), budget.correction, budget.delta,
                             grid_size);
}

PreparedBySignal prepare_signals(const Dataset& dataset, const std::vector<SignalSpec>& signals,
                                 int workers) {
  PreparedBySignal prepared;
  for (const SignalSpec& spec : signals) {
    prepared[spec.name] = prepare_dataset(dataset, spec, workers);
  }
  return prepared;
}

CandidateTable evaluate_candidates(const std::vector<SignalSpec>& signals,
                                   const PreparedBySignal& prepared,
                                   const std::vector<std::size_t>& indices,
                                   const CandidateGrid& grid, Side side,
                                   std::optional<double> dual_lambda_plus, int workers) {
  if (indices.empty()) throw std::invalid_argument("evaluate_candidates: empty validation set");
  const LossKind risk_loss = side == Side::upper ? LossKind::false_positive_upper
                                                 : LossKind::false_negative_lower;
  const LossKind eff_loss = side == Side::upper ? LossKind::efficiency_upper
                                                : LossKind::efficiency_lower;

  CandidateTable table;
  table.side = side;
  table.n_validation = indices.size();
  for (const SignalSpec& spec : signals) {
    const auto& per_signal = side == Side::upper ? grid.upper : grid.lower;
    const auto git = per_signal.find(spec.name);
    if (git == per_signal.end()) continue;
    const auto pit = prepared.find(spec.name);
    if (pit == prepared.end()) {
      throw std::invalid_argument("evaluate_candidates: signal '" + spec.name +
                                  "' was not prepared");
    }
    for (double parameter : git->second) {
      CandidateEval row;
      row.signal = spec.name;
      row.parameter = parameter;
      table.rows.push_back(std::move(row));
    }
  }
  table.grid_size = table.rows.size();
  if (table.grid_size == 0) throw std::invalid_argument("evaluate_candidates: empty grid");

  parallel_for(table.rows.size(), workers, [&](std::size_t r) {
    CandidateEval& row = table.rows[r];
    const std::vector<PreparedTrajectory>& items = prepared.at(row.signal);
    std::vector<double> risk_losses(indices.size());
    std::vector<double> eff_losses(indices.size());
    for (std::size_t k = 0; k < indices.size(); ++k) {
      const PreparedTrajectory& p = items[indices[k]];
      ExitOutcome outcome;
      if (side == Side::upper) {
        outcome = combine_exits(prepared_upper_exit(p, row.parameter), std::nullopt, p);
      } else if (dual_lambda_plus) {
        outcome = combine_exits(prepared_upper_exit(p, *dual_lambda_plus),
                                prepared_lower_exit(p, row.parameter, *dual_lambda_plus,
                                                    std::nullopt),
                                p);
      } else {
        outcome = combine_exits(std::nullopt,
                                prepared_lower_exit(p, row.parameter, std::nullopt,
                                                    std::nullopt),
                                p);
      }
      risk_losses[k] = prepared_loss(risk_loss, p, outcome);
      eff_losses[k] = prepared_loss(eff_loss, p, outcome);
    }
    row.empirical = stable_mean(std::move(risk_losses));
    row.efficiency = stable_mean(std::move(eff_losses));
  });
  return table;
}

namespace {

// D9 ordering among feasible rows: smaller efficiency, then smaller
// adjusted risk (equivalently empirical under a fixed correction), then the
// more conservative parameter, then signal name.
bool better_candidate(const CandidateEval& a, const CandidateEval& b, Side side) {
  if (a.efficiency != b.efficiency) return a.efficiency < b.efficiency;
  if (a.empirical != b.empirical) return a.empirical < b.empirical;
  if (a.parameter != b.parameter) {
    return side == Side::upper ? a.parameter > b.parameter : a.parameter < b.parameter;
  }
  return a.signal < b.signal;
}

}  // namespace

std::optional<std::size_t> select_candidate(const CandidateTable& table, double epsilon,
                                            Correction correction, double delta) {
  std::optional<std::size_t> best;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const double adjusted = adjusted_risk_value(table.rows[r].empirical, table.n_validation,
                                                correction, delta, table.grid_size);
    if (adjusted > epsilon) continue;
    if (!best || better_candidate(table.rows[r], table.rows[*best], table.side)) {
      best = r;
    }
  }
  return best;
}

std::optional<std::size_t> min_risk_candidate(const CandidateTable& table) {
  std::optional<std::size_t> best;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (!best) {
      best = r;
      continue;
    }
    const CandidateEval& a = table.rows[r];
    const CandidateEval& b = table.rows[*best];
    const bool better = a.empirical != b.empirical ? a.empirical < b.empirical
                        : a.efficiency != b.efficiency
                            ? a.efficiency < b.efficiency
                            : a.parameter > b.parameter;
    if (better) best = r;
  }
  return best;
}

namespace {

CalibrationOutcome outcome_from_table(const CandidateTable& table, double epsilon,
                                      Correction correction, double delta) {
  CalibrationOutcome outcome;
  outcome.grid_size = table.grid_size;
  for (const CandidateEval& row : table.rows) {
    const double adjusted =
        adjusted_risk_value(row.empirical, table.n_validation, correction, delta,
                            table.grid_size);
    if (adjusted <= epsilon) {
      outcome.feasible_set.push_back(
          {row.signal, row.parameter, row.empirical, adjusted, row.efficiency});
    }
  }
  const std::optional<std::size_t> best = select_candidate(table, epsilon, correction, delta);
  if (!best) {
    outcome.infeasible_reason = "no candidate with adjusted risk <= " +
                                std::to_string(epsilon) + " among " +
                                std::to_string(table.grid_size) + " candidates";
    return outcome;
  }
  const CandidateEval& sel = table.rows[*best];
  outcome.selected = {sel.signal, sel.parameter};
  outcome.empirical_risk = sel.empirical;
  outcome.adjusted_risk = adjusted_risk_value(sel.empirical, table.n_validation, correction,
                                              delta, table.grid_size);
  outcome.efficiency_estimate = sel.efficiency;
  return outcome;
}

}  // namespace

CalibrationOutcome calibrate(const Dataset& validation, const std::vector<SignalSpec>& signals,
                             const CandidateGrid& grid, const RiskBudget& budget,
                             LossKind efficiency, int workers) {
  validate_budget(budget);
  const Side side = budget.loss == LossKind::false_positive_upper ? Side::upper : Side::lower;
  if ((side == Side::upper && efficiency != LossKind::efficiency_upper) ||
      (side == Side::lower && efficiency != LossKind::efficiency_lower)) {
    throw std::invalid_argument("efficiency loss does not pair with the risk loss");
  }
  if (validation.size() == 0) throw std::invalid_argument("calibrate: empty validation set");

  const PreparedBySignal prepared = prepare_signals(validation, signals, workers);
  std::vector<std::size_t> indices(validation.size());
  std::iota(indices.begin(), indices.end(), std::size_t{0});
  const CandidateTable table = evaluate_candidates(signals, prepared, indices, grid, side,
                                                   std::nullopt, workers);
  return outcome_from_table(table, budget.epsilon, budget.correction, budget.delta);
}

DualOutcome calibrate_dual(const Dataset& validation, const SignalSpec& signal,
                           const CandidateGrid& upper_grid, const CandidateGrid& lower_grid,
                           const DualBudgets& budgets, Correction correction, int workers) {
  DualOutcome result;
  const std::vector<SignalSpec> signals = {signal};
  RiskBudget upper_budget{LossKind::false_positive_upper, budgets.eps_plus, budgets.delta,
                          correction};
  result.upper_stage =
      calibrate(validation, signals, upper_grid, upper_budget, LossKind::efficiency_upper,
                workers);
  if (!result.upper_stage.selected) {
    result.infeasible_stage = DualStage::upper;
    return result;
  }
  const double lambda_plus = result.upper_stage.selected->second;

  const PreparedBySignal prepared = prepare_signals(validation, signals, workers);
  std::vector<std::size_t> indices(validation.size());
  std::iota(indices.begin(), indices.end(), std::size_t{0});
  const CandidateTable lower_table = evaluate_candidates(
      signals, prepared, indices, lower_grid, Side::lower, lambda_plus, workers);
  result.lower_stage = outcome_from_table(lower_table, budgets.eps_minus, correction,
                                          budgets.delta);
  if (!result.lower_stage.selected) {
    result.infeasible_stage = DualStage::lower;
    return result;
  }
  const double c = result.lower_stage.selected->second;
  result.policy = DualPolicy(UpperPolicy{signal.name, lambda_plus},
                             LowerPolicy{signal.name, c, std::nullopt, std::nullopt});
  return result;
}

}  // namespace constop
