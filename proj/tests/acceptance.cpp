// Acceptance suite: exact formula checks, oracle equivalence against
// independently coded brute-force scans, and statistical property runs on
// synthetic populations. Prints one pass/fail line per criterion and exits
// nonzero if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "constop/calibrate.hpp"
#include "constop/dataset_io.hpp"
#include "constop/harness.hpp"
#include "constop/rng.hpp"
#include "constop/synth.hpp"

using namespace constop;

namespace {

struct CheckList {
  bool ok = true;
  std::string detail;

  void require(bool condition, const std::string& what) {
    if (!condition) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Independent oracle: a from-scratch implementation of the transform, the
// exits, the losses, and the Algorithm-1 scan. Shares nothing with src/
// except the pinned numeric formulas.
// ---------------------------------------------------------------------------

std::vector<double> oracle_series(const Trajectory& traj, const SignalSpec& spec) {
  std::vector<double> v;
  for (const StepRecord& step : traj.steps) {
    double x = spec.name == "tokens" ? static_cast<double>(step.cum_tokens)
                                     : step.raw_signals.at(spec.name);
    if (spec.orientation == Orientation::lower_confident) x = -x;
    v.push_back(x);
  }
  if (spec.transform.kind == Transform::Kind::ema) {
    const double a = spec.transform.alpha;
    for (std::size_t i = 1; i < v.size(); ++i) v[i] = a * v[i] + (1.0 - a) * v[i - 1];
  }
  return v;
}

double oracle_sigmoid(double tokens, double budget, double c, double cap) {
  const double z = c * (tokens - 0.5 * budget);
  double s;
  if (z >= 0.0) {
    s = 1.0 / (1.0 + std::exp(-z));
  } else {
    const double e = std::exp(z);
    s = e / (1.0 + e);
  }
  return cap * s;
}

double oracle_mean(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

struct OracleExit {
  int step = 0;
  bool via_upper = false;
  bool via_lower = false;
};

// Upper-only exit profile at lambda; step = T and no flag set means budget.
OracleExit oracle_upper_profile(const std::vector<double>& series, double lambda) {
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series[i] >= lambda) return {static_cast<int>(i) + 1, true, false};
  }
  return {static_cast<int>(series.size()), false, false};
}

OracleExit oracle_lower_profile(const std::vector<double>& series, const Trajectory& traj,
                                double c, double cap) {
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double curve = oracle_sigmoid(static_cast<double>(traj.steps[i].cum_tokens),
                                        static_cast<double>(traj.budget_tokens), c, cap);
    if (series[i] < curve) return {static_cast<int>(i) + 1, false, true};
  }
  return {static_cast<int>(series.size()), false, false};
}

int oracle_first_correct(const Trajectory& traj) {
  for (const StepRecord& step : traj.steps) {
    if (step.correct) return step.step_index;
  }
  return 0;
}

double oracle_loss(LossKind kind, const Trajectory& traj, const OracleExit& exit) {
  const int T = static_cast<int>(traj.steps.size());
  switch (kind) {
    case LossKind::false_positive_upper:
      return exit.via_upper && !traj.steps[exit.step - 1].correct ? 1.0 : 0.0;
    case LossKind::false_negative_lower: {
      if (!exit.via_lower) return 0.0;
      int correct = 0;
      for (int t = exit.step; t <= T; ++t) correct += traj.steps[t - 1].correct ? 1 : 0;
      return static_cast<double>(correct) / static_cast<double>(T - exit.step + 1);
    }
    case LossKind::efficiency_upper: {
      const int first = oracle_first_correct(traj);
      if (first == 0) return 0.0;
      return static_cast<double>(std::max(0, exit.step - first)) / static_cast<double>(T);
    }
    case LossKind::efficiency_lower: {
      int incorrect = 0;
      for (int t = 1; t <= exit.step; ++t) incorrect += traj.steps[t - 1].correct ? 0 : 1;
      return static_cast<double>(incorrect) / static_cast<double>(T);
    }
  }
  return 0.0;
}

struct OracleSelection {
  bool feasible = false;
  std::string signal;
  double parameter = 0.0;
  double empirical = 0.0;
  double adjusted = 0.0;
  double efficiency = 0.0;
};

// Full Algorithm-1 scan: every candidate, adjusted feasibility, efficiency
// argmin with the documented tie rules.
OracleSelection oracle_calibrate(const Dataset& validation,
                                 const std::vector<SignalSpec>& signals,
                                 const CandidateGrid& grid, bool upper_side, double epsilon,
                                 Correction correction, double delta) {
  struct Row {
    std::string signal;
    double parameter, empirical, efficiency;
  };
  std::vector<Row> rows;
  for (const SignalSpec& spec : signals) {
    const auto& per_signal = upper_side ? grid.upper : grid.lower;
    const auto it = per_signal.find(spec.name);
    if (it == per_signal.end()) continue;
    std::vector<std::vector<double>> series;
    for (const Trajectory& traj : validation.trajectories) {
      series.push_back(oracle_series(traj, spec));
    }
    for (double param : it->second) {
      std::vector<double> risk_losses;
      std::vector<double> eff_losses;
      for (std::size_t i = 0; i < validation.trajectories.size(); ++i) {
        const Trajectory& traj = validation.trajectories[i];
        const OracleExit exit = upper_side
                                    ? oracle_upper_profile(series[i], param)
                                    : oracle_lower_profile(series[i], traj, param, 1.0);
        risk_losses.push_back(oracle_loss(upper_side ? LossKind::false_positive_upper
                                                     : LossKind::false_negative_lower,
                                          traj, exit));
        eff_losses.push_back(oracle_loss(upper_side ? LossKind::efficiency_upper
                                                    : LossKind::efficiency_lower,
                                         traj, exit));
      }
      rows.push_back({spec.name, param, oracle_mean(risk_losses), oracle_mean(eff_losses)});
    }
  }
  const std::size_t grid_size = rows.size();
  const std::size_t n = validation.size();
  auto adjusted_of = [&](double empirical) {
    switch (correction) {
      case Correction::naive:
        return empirical;
      case Correction::ucb:
        return empirical + std::sqrt(std::log(1.0 / delta) / (2.0 * static_cast<double>(n)));
      case Correction::ucb_union:
        return empirical + std::sqrt(std::log(1.0 / (delta / static_cast<double>(grid_size))) /
                                     (2.0 * static_cast<double>(n)));
    }
    return empirical;
  };
  OracleSelection best;
  for (const Row& row : rows) {
    if (adjusted_of(row.empirical) > epsilon) continue;
    bool better = false;
    if (!best.feasible) {
      better = true;
    } else if (row.efficiency != best.efficiency) {
      better = row.efficiency < best.efficiency;
    } else if (row.empirical != best.empirical) {
      better = row.empirical < best.empirical;
    } else if (row.parameter != best.parameter) {
      better = upper_side ? row.parameter > best.parameter : row.parameter < best.parameter;
    } else {
      better = row.signal < best.signal;
    }
    if (better) {
      best.feasible = true;
      best.signal = row.signal;
      best.parameter = row.parameter;
      best.empirical = row.empirical;
      best.adjusted = adjusted_of(row.empirical);
      best.efficiency = row.efficiency;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Criterion 1: Hoeffding margin exactness.
// ---------------------------------------------------------------------------

CheckList criterion1() {
  CheckList check;
  const double corr = hoeffding_correction(50, 0.05);
  check.require(std::fabs(corr - 0.173082) <= 1e-6,
                "correction(50, 0.05) = " + fmt(corr) + ", want 0.173082 +- 1e-6");
  check.require(corr == std::sqrt(std::log(20.0) / 100.0), "closed form mismatch");
  for (std::size_t n : {8u, 20u, 50u, 200u, 1000u}) {
    for (double delta : {0.01, 0.05, 0.1, 0.25}) {
      const double ratio = hoeffding_correction(n, delta) / hoeffding_correction(4 * n, delta);
      check.require(std::fabs(ratio - 2.0) <= 1e-12,
                    "quadrupling n should halve the margin (n=" + std::to_string(n) + ")");
    }
  }
  check.note("correction(50, 0.05) = " + fmt(corr));
  return check;
}

// ---------------------------------------------------------------------------
// Criterion 2: Algorithm-1 selection equals the brute-force oracle.
// ---------------------------------------------------------------------------

CheckList criterion2() {
  CheckList check;
  Rng rng(20240);
  int cases = 0;
  int none_branch = 0;
  std::size_t max_grid = 0;

  for (int trial = 0; trial < 220; ++trial) {
    SynthConfig cfg;
    cfg.population = 16 + static_cast<int>(rng.uniform_int(45));
    cfg.solvable_fraction = rng.uniform();
    cfg.steps = 4 + static_cast<int>(rng.uniform_int(13));
    cfg.tokens_per_step = 50 + static_cast<int>(rng.uniform_int(100));
    cfg.budget_tokens = static_cast<std::int64_t>(cfg.steps) * cfg.tokens_per_step;
    cfg.solvable = {1.0 + rng.uniform() * (cfg.steps - 1), 0.3 + rng.uniform(),
                    rng.uniform() * 0.15};
    cfg.unsolvable = {0.15 + rng.uniform() * 0.3, rng.uniform() * 0.15, rng.uniform() * 0.2};
    cfg.seed = rng.next_u64();
    const Dataset validation = generate(cfg);

    std::vector<SignalSpec> signals = {{cfg.signal_name,
                                        rng.bernoulli(0.2) ? Orientation::lower_confident
                                                           : Orientation::higher_confident,
                                        rng.bernoulli(0.3) ? Transform::ema(0.3)
                                                           : Transform::identity()}};
    if (rng.bernoulli(0.4)) {
      signals.push_back({kTokensSignal, Orientation::higher_confident, Transform::identity()});
    }

    GridMode mode;
    if (trial % 40 == 0) {
      mode = {GridMode::Kind::uniform, 5000};  // ~1e4 candidates with two signals
    } else if (rng.bernoulli(0.3)) {
      mode = {GridMode::Kind::quantile, 2 + static_cast<int>(rng.uniform_int(40))};
    } else {
      mode = {GridMode::Kind::uniform, 2 + static_cast<int>(rng.uniform_int(120))};
    }
    if (trial % 40 == 0 && signals.size() == 1) {
      signals.push_back({kTokensSignal, Orientation::higher_confident, Transform::identity()});
    }
    const int lower_count = 8 + static_cast<int>(rng.uniform_int(56));
    const CandidateGrid grid = build_grid(validation, signals, mode, lower_count);

    const bool upper_side = rng.bernoulli(0.5);
    const double pick = rng.uniform();
    const double epsilon = pick < 0.15 ? 0.0 : pick < 0.9 ? rng.uniform() : 1.0;
    const Correction correction = static_cast<Correction>(rng.uniform_int(3));
    const double delta = 0.02 + rng.uniform() * 0.2;

    const RiskBudget budget{upper_side ? LossKind::false_positive_upper
                                       : LossKind::false_negative_lower,
                            epsilon, delta, correction};
    const CalibrationOutcome outcome =
        calibrate(validation, signals, grid, budget,
                  upper_side ? LossKind::efficiency_upper : LossKind::efficiency_lower);
    const OracleSelection expected =
        oracle_calibrate(validation, signals, grid, upper_side, epsilon, correction, delta);

    max_grid = std::max(max_grid, outcome.grid_size);
    ++cases;
    if (!expected.feasible) ++none_branch;

    if (outcome.selected.has_value() != expected.feasible) {
      check.require(false, "feasibility mismatch at case " + std::to_string(trial));
      continue;
    }
    if (expected.feasible) {
      check.require(outcome.selected->first == expected.signal,
                    "signal mismatch at case " + std::to_string(trial));
      check.require(outcome.selected->second == expected.parameter,
                    "parameter mismatch at case " + std::to_string(trial));
      check.require(outcome.adjusted_risk == expected.adjusted,
                    "adjusted risk mismatch at case " + std::to_string(trial));
      check.require(outcome.efficiency_estimate == expected.efficiency,
                    "efficiency mismatch at case " + std::to_string(trial));
    }
  }
  check.require(cases >= 200, "need at least 200 cases");
  check.require(none_branch >= 10, "need the (None, None) branch exercised");
  check.require(max_grid >= 9000, "need grids up to 1e4 candidates");
  check.note(std::to_string(cases) + " cases, max grid " + std::to_string(max_grid) +
             ", none-branch " + std::to_string(none_branch));
  return check;
}

// ---------------------------------------------------------------------------
// Criterion 3: coverage guarantee on a 1e4-trajectory pool.
// ---------------------------------------------------------------------------

double pool_fp_risk(const std::vector<PreparedTrajectory>& pool, double lambda) {
  std::vector<double> losses(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const ExitOutcome out =
        combine_exits(prepared_upper_exit(pool[i], lambda), std::nullopt, pool[i]);
    losses[i] = prepared_loss(LossKind::false_positive_upper, pool[i], out);
  }
  return stable_mean(std::move(losses));
}

CheckList criterion3() {
  CheckList check;
  SynthConfig cfg;
  cfg.population = 10000;
  cfg.solvable_fraction = 0.5;
  cfg.steps = 20;
  cfg.tokens_per_step = 100;
  cfg.budget_tokens = 2000;
  cfg.solvable = {8.0, 0.5, 0.10};
  cfg.unsolvable = {0.30, 0.12, 0.05};
  cfg.seed = 777;
  const Dataset pool = generate(cfg, 0);
  const SignalSpec signal{cfg.signal_name, Orientation::higher_confident,
                          Transform::identity()};
  const std::vector<PreparedTrajectory> prepared_pool = prepare_dataset(pool, signal, 0);

  std::vector<double> epsilons;
  for (int i = 1; i <= 19; ++i) epsilons.push_back(0.05 * i);

  SweepSpec spec;
  spec.epsilons = epsilons;
  spec.splits = 200;
  spec.validation_size = 50;
  spec.corrections = {Correction::ucb_union};
  spec.delta = 0.1;
  spec.seed = 101;
  spec.signals = {signal};
  spec.grid = {GridMode::Kind::uniform, 64};
  spec.workers = 0;

  std::map<double, double> risk_cache;
  auto violation_fraction = [&](const std::vector<SweepRow>& rows, const std::string& corr,
                                std::size_t* feasible_out) {
    std::size_t cells = 0;
    std::size_t violations = 0;
    std::size_t feasible = 0;
    for (const SweepRow& row : rows) {
      if (row.correction != corr) continue;
      ++cells;
      if (!row.feasible()) continue;
      ++feasible;
      auto it = risk_cache.find(row.parameter);
      if (it == risk_cache.end()) {
        it = risk_cache.emplace(row.parameter, pool_fp_risk(prepared_pool, row.parameter))
                 .first;
      }
      if (it->second > row.epsilon) ++violations;
    }
    if (feasible_out) *feasible_out = feasible;
    return static_cast<double>(violations) / static_cast<double>(cells);
  };

  // n = 50 with the union-bound correction: guaranteed coverage.
  const std::vector<SweepRow> union_rows = coverage_sweep(pool, spec, RiskSide::upper_fp);
  std::size_t union_feasible = 0;
  const double union_violation = violation_fraction(union_rows, "ucb_union", &union_feasible);
  check.require(union_feasible > 0, "ucb_union never selected anything");
  check.require(union_violation <= 0.10,
                "ucb_union violation fraction " + fmt(union_violation) + " > 0.10");

  // n = 8 paired seeds: naive must overfit more than ucb.
  SweepSpec small = spec;
  small.validation_size = 8;
  small.corrections = {Correction::naive, Correction::ucb};
  small.seed = 303;
  const std::vector<SweepRow> small_rows = coverage_sweep(pool, small, RiskSide::upper_fp);
  const double naive_violation = violation_fraction(small_rows, "naive", nullptr);
  const double ucb_violation = violation_fraction(small_rows, "ucb", nullptr);
  check.require(naive_violation > ucb_violation,
                "naive (" + fmt(naive_violation) + ") not above ucb (" + fmt(ucb_violation) +
                    ") at n=8");
  check.note("union " + fmt(union_violation) + ", naive@8 " + fmt(naive_violation) +
             ", ucb@8 " + fmt(ucb_violation));
  return check;
}

// ---------------------------------------------------------------------------
// Criterion 4: combined thresholds cut tokens on a 1:3 solvable mix.
// ---------------------------------------------------------------------------

CheckList criterion4() {
  CheckList check;
  SynthConfig cfg;
  cfg.population = 800;
  cfg.solvable_fraction = 0.5;
  cfg.steps = 20;
  cfg.tokens_per_step = 100;
  cfg.budget_tokens = 2000;
  cfg.solvable = {8.0, 0.5, 0.05};
  cfg.unsolvable = {0.25, 0.08, 0.0};
  cfg.seed = 2024;
  const Dataset base = generate(cfg, 0);
  const Dataset mixed = subsample_by_ratio(base, {1, 3}, 400, 99);

  SweepSpec spec;
  for (int i = 1; i <= 14; ++i) spec.epsilons.push_back(0.05 * i);
  spec.splits = 3;
  spec.validation_size = 50;
  spec.corrections = {Correction::ucb};
  spec.delta = 0.05;
  spec.seed = 11;
  spec.signals = {{cfg.signal_name, Orientation::higher_confident, Transform::identity()}};
  spec.grid = {GridMode::Kind::uniform, 64};
  spec.workers = 0;

  const std::vector<SweepRow> dual_rows = efficiency_sweep(mixed, spec, EfficiencyMode::dual);
  const std::vector<SweepRow> upper_rows =
      efficiency_sweep(mixed, spec, EfficiencyMode::upper_only);

  const std::optional<SweepRow> op = pick_operating_point(dual_rows);
  if (!op) {
    check.require(false, "no dual operating point");
    return check;
  }

  std::int64_t best_upper_tokens = -1;
  for (const SweepRow& row : upper_rows) {
    if (!row.feasible() || !std::isfinite(row.accuracy)) continue;
    if (std::fabs(row.accuracy - op->accuracy) > 0.02) continue;
    if (best_upper_tokens < 0 || row.total_tokens < best_upper_tokens) {
      best_upper_tokens = row.total_tokens;
    }
  }
  check.require(best_upper_tokens > 0,
                "no upper-only row within 2% accuracy of the dual point");
  if (best_upper_tokens > 0) {
    const double ratio =
        static_cast<double>(op->total_tokens) / static_cast<double>(best_upper_tokens);
    check.require(ratio <= 0.8, "dual/upper token ratio " + fmt(ratio) + " > 0.8");
    check.note("token ratio " + fmt(ratio));
  }

  const std::int64_t solvable = op->triggers_upper_solvable + op->triggers_lower_solvable +
                                op->triggers_budget_solvable;
  const std::int64_t unsolvable = op->triggers_upper_unsolvable +
                                  op->triggers_lower_unsolvable +
                                  op->triggers_budget_unsolvable;
  const double solvable_via_upper =
      static_cast<double>(op->triggers_upper_solvable) / static_cast<double>(solvable);
  const double unsolvable_via_lower =
      static_cast<double>(op->triggers_lower_unsolvable) / static_cast<double>(unsolvable);
  check.require(solvable_via_upper >= 0.8,
                "solvable-via-upper " + fmt(solvable_via_upper) + " < 0.8");
  check.require(unsolvable_via_lower >= 0.8,
                "unsolvable-via-lower " + fmt(unsolvable_via_lower) + " < 0.8");
  check.note("upper-exit share " + fmt(solvable_via_upper) + ", lower-exit share " +
             fmt(unsolvable_via_lower));
  return check;
}

// ---------------------------------------------------------------------------
// Criterion 5: the ensemble picks the constructed dominant signal.
// ---------------------------------------------------------------------------

CheckList criterion5() {
  CheckList check;
  SynthConfig cfg;
  cfg.population = 300;
  cfg.solvable_fraction = 1.0;
  cfg.steps = 16;
  cfg.tokens_per_step = 100;
  cfg.budget_tokens = 1600;
  cfg.solvable = {6.0, 1.0, 0.02};
  cfg.unsolvable = {0.2, 0.05, 0.0};
  cfg.seed = 55;
  Dataset dataset = generate(cfg, 0);

  // Second channel: the same signal delayed by three steps. Any exit it can
  // realize is a fast-channel exit three steps later, so it is strictly less
  // efficient wherever both are feasible.
  const int lag = 3;
  for (Trajectory& traj : dataset.trajectories) {
    for (int t = traj.step_count(); t >= 1; --t) {
      const int src = std::max(1, t - lag);
      traj.steps[t - 1].raw_signals["slow"] =
          traj.steps[src - 1].raw_signals.at(cfg.signal_name);
      traj.steps[t - 1].raw_signals["fast"] =
          traj.steps[t - 1].raw_signals.at(cfg.signal_name);
    }
    for (auto& step : traj.steps) step.raw_signals.erase(cfg.signal_name);
  }
  dataset.signal_catalog = {"fast", "slow"};

  SweepSpec spec;
  for (int i = 0; i <= 10; ++i) spec.epsilons.push_back(0.05 * i);
  spec.splits = 5;
  spec.validation_size = 40;
  spec.corrections = {Correction::naive};
  spec.seed = 21;
  spec.signals = {{"fast", Orientation::higher_confident, Transform::identity()},
                  {"slow", Orientation::higher_confident, Transform::identity()}};
  spec.grid = {GridMode::Kind::uniform, 64};
  spec.workers = 0;

  const std::vector<SweepRow> rows =
      efficiency_sweep(dataset, spec, EfficiencyMode::upper_only);
  std::size_t feasible = 0;
  for (const SweepRow& row : rows) {
    if (!row.feasible()) continue;
    ++feasible;
    if (row.signal_selected != "fast") {
      check.require(false, "epsilon " + fmt(row.epsilon) + " picked " + row.signal_selected);
      break;
    }
  }
  check.require(feasible > 0, "no feasible cells");
  check.note(std::to_string(feasible) + " feasible cells, all picked fast");
  return check;
}

// ---------------------------------------------------------------------------
// Criterion 6: exact loss/policy/transform property bundle.
// ---------------------------------------------------------------------------

CheckList criterion6() {
  CheckList check;
  Rng rng(606);
  const SignalSpec spec{"s", Orientation::higher_confident, Transform::identity()};

  int bad_range = 0;
  int bad_exclusive = 0;
  int bad_min = 0;
  for (int trial = 0; trial < 100000; ++trial) {
    const int T = 1 + static_cast<int>(rng.uniform_int(14));
    Trajectory traj;
    traj.id = "r";
    traj.budget_tokens = static_cast<std::int64_t>(T) * 100;
    for (int t = 1; t <= T; ++t) {
      StepRecord step;
      step.step_index = t;
      step.cum_tokens = static_cast<std::int64_t>(t) * 100;
      step.raw_signals["s"] = rng.normal();
      step.correct = rng.bernoulli(0.35);
      traj.steps.push_back(std::move(step));
    }
    const double lambda = rng.normal();
    const double c = std::pow(10.0, -4.0 + 3.0 * rng.uniform());
    const DualPolicy policy(UpperPolicy{"s", lambda}, LowerPolicy{"s", c});
    const ExitOutcome out = dual_exit(traj, policy, spec);

    const double fp = fp_loss(traj, out);
    const double fn = fn_loss(traj, out);
    const double eu = eff_upper_loss(traj, out);
    const double el = eff_lower_loss(traj, out);
    for (double v : {fp, fn, eu, el}) {
      if (!(v >= 0.0 && v <= 1.0)) ++bad_range;
    }
    if (fp > 0.0 && fn > 0.0) ++bad_exclusive;

    // independent scans
    const std::vector<double> series = oracle_series(traj, spec);
    const OracleExit up = oracle_upper_profile(series, lambda);
    const OracleExit low = oracle_lower_profile(series, traj, c, lambda);
    const int expected =
        std::min({up.via_upper ? up.step : T + 1, low.via_lower ? low.step : T + 1, T});
    if (out.exit_step != std::min(expected, T)) ++bad_min;
  }
  check.require(bad_range == 0, std::to_string(bad_range) + " losses out of [0,1]");
  check.require(bad_exclusive == 0, "fp and fn fired together");
  check.require(bad_min == 0, "dual exit differs from min of independent scans");

  // sigmoid identities
  bool sigmoid_ok = true;
  for (int i = 0; i < 500; ++i) {
    const std::int64_t budget = 2 * (1 + static_cast<std::int64_t>(rng.uniform_int(5000)));
    const double c = rng.uniform() * 0.01;
    const double cap = 0.05 + rng.uniform();
    if (sigmoid_threshold(budget / 2, budget, c) != 0.5) sigmoid_ok = false;
    if (sigmoid_threshold(budget / 2, budget, c, cap) != 0.5 * cap) sigmoid_ok = false;
  }
  check.require(sigmoid_ok, "sigmoid identities failed");

  // capped curve strictly below lambda_plus across whole trajectories
  bool cap_ok = true;
  for (int i = 0; i < 200 && cap_ok; ++i) {
    const int T = 1 + static_cast<int>(rng.uniform_int(30));
    const double lambda = 0.05 + rng.uniform();
    const double c = std::pow(10.0, -4.0 + 2.0 * rng.uniform());
    const std::int64_t budget = static_cast<std::int64_t>(T) * 100;
    for (int t = 1; t <= T; ++t) {
      if (!(sigmoid_threshold(t * 100, budget, c, lambda) < lambda)) cap_ok = false;
    }
  }
  check.require(cap_ok, "capped curve reached lambda_plus");

  // smoothing causality, exact
  bool causal_ok = true;
  for (int i = 0; i < 300 && causal_ok; ++i) {
    const int n = 1 + static_cast<int>(rng.uniform_int(24));
    std::vector<double> series;
    for (int k = 0; k < n; ++k) series.push_back(rng.normal());
    const Transform tr = Transform::ema(0.05 + 0.95 * rng.uniform());
    const std::vector<double> full = smooth(series, tr);
    for (int k = 1; k <= n && causal_ok; ++k) {
      const std::vector<double> prefix = smooth({series.begin(), series.begin() + k}, tr);
      for (int j = 0; j < k; ++j) {
        if (prefix[j] != full[j]) causal_ok = false;
      }
    }
  }
  check.require(causal_ok, "smoothing is not causal");

  // emit/ingest round-trip, byte level
  bool roundtrip_ok = true;
  for (int i = 0; i < 20 && roundtrip_ok; ++i) {
    SynthConfig cfg;
    cfg.population = 40;
    cfg.solvable_fraction = rng.uniform();
    cfg.steps = 3 + static_cast<int>(rng.uniform_int(10));
    cfg.tokens_per_step = 80;
    cfg.budget_tokens = static_cast<std::int64_t>(cfg.steps) * 80 + 50;
    cfg.solvable = {1.0 + rng.uniform() * (cfg.steps - 1), 0.8, 0.3};
    cfg.unsolvable = {0.3, 0.2, 0.1};
    cfg.seed = rng.next_u64();
    Dataset ds = generate(cfg);
    ds.trajectories[0].meta["note"] = "round trip";
    ds.trajectories[0].token_records.assign(
        static_cast<std::size_t>(ds.trajectories[0].step_count()),
        AnswerTokenRecord{{-0.25, -1.5}, 0.75});
    std::ostringstream first;
    emit_stream(ds, first);
    std::istringstream parse_back(first.str());
    const IngestResult back = ingest_stream(parse_back, Strictness::strict);
    std::ostringstream second;
    emit_stream(back.dataset, second);
    if (first.str() != second.str() || back.dataset.size() != ds.size()) {
      roundtrip_ok = false;
    }
  }
  check.require(roundtrip_ok, "emit/ingest round-trip drifted");
  check.note("100000 loss pairs, scans, identities, causality, round-trip");
  return check;
}

// ---------------------------------------------------------------------------
// Criterion 7: short->long length shift degrades lower-threshold coverage.
// ---------------------------------------------------------------------------

CheckList criterion7() {
  CheckList check;
  SynthConfig short_cfg;
  short_cfg.population = 4000;
  short_cfg.solvable_fraction = 0.5;
  short_cfg.steps = 12;
  short_cfg.tokens_per_step = 100;
  short_cfg.budget_tokens = 1200;
  short_cfg.solvable = {5.0, 0.8, 0.06};
  short_cfg.unsolvable = {0.30, 0.08, 0.0};
  short_cfg.seed = 31;
  SynthConfig long_cfg = short_cfg;
  long_cfg.steps = 30;
  long_cfg.budget_tokens = 3000;
  long_cfg.solvable.drift_midpoint_step = 18.0;
  long_cfg.seed = 32;

  const Dataset short_pool = generate(short_cfg, 0);
  const Dataset long_pool = generate(long_cfg, 0);

  SweepSpec spec;
  for (int i = 1; i <= 10; ++i) spec.epsilons.push_back(0.05 * i);
  spec.splits = 100;
  spec.validation_size = 16;
  spec.corrections = {Correction::naive};
  spec.seed = 7;
  spec.signals = {{short_cfg.signal_name, Orientation::higher_confident,
                   Transform::identity()}};
  spec.grid = {GridMode::Kind::uniform, 32};
  spec.workers = 0;

  auto violation_fraction = [](const std::vector<SweepRow>& rows) {
    std::size_t cells = 0;
    std::size_t violations = 0;
    for (const SweepRow& row : rows) {
      ++cells;
      if (row.feasible() && row.test_risk > row.epsilon) ++violations;
    }
    return static_cast<double>(violations) / static_cast<double>(cells);
  };

  const double fn_shifted =
      violation_fraction(ablation_shift(short_pool, long_pool, spec, RiskSide::lower_fn));
  const double fn_baseline =
      violation_fraction(ablation_shift(long_pool, long_pool, spec, RiskSide::lower_fn));
  check.require(fn_shifted > fn_baseline,
                "fn shifted " + fmt(fn_shifted) + " not above baseline " + fmt(fn_baseline));

  // fp side: reported only, no required ordering
  const double fp_shifted =
      violation_fraction(ablation_shift(short_pool, long_pool, spec, RiskSide::upper_fp));
  const double fp_baseline =
      violation_fraction(ablation_shift(long_pool, long_pool, spec, RiskSide::upper_fp));
  check.note("fn shifted " + fmt(fn_shifted) + " vs baseline " + fmt(fn_baseline) +
             "; fp shifted " + fmt(fp_shifted) + " vs baseline " + fmt(fp_baseline) +
             " (reported)");
  return check;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    CheckList (*run)();
  };
  const Criterion criteria[] = {
      {1, "Hoeffding correction exactness", criterion1},
      {2, "Algorithm-1 oracle equivalence", criterion2},
      {3, "coverage guarantee on the synthetic pool", criterion3},
      {4, "dual-threshold efficiency on a 1:3 mix", criterion4},
      {5, "ensemble selects the dominant signal", criterion5},
      {6, "loss/policy/transform property bundle", criterion6},
      {7, "length-shift degradation of the lower threshold", criterion7},
  };

  int failures = 0;
  for (const Criterion& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    CheckList result;
    try {
      result = criterion.run();
    } catch (const std::exception& e) {
      result.ok = false;
      result.detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] criterion %d: %s - %s (%.1fs)\n", result.ok ? "PASS" : "FAIL",
                criterion.id, criterion.name,
                result.detail.empty() ? "ok" : result.detail.c_str(), seconds);
    std::fflush(stdout);
    if (!result.ok) ++failures;
  }
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all acceptance criteria passed\n");
  return 0;
}
