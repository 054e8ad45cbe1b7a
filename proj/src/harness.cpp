#include "constop/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "constop/dataset_io.hpp"
#include "constop/parallel.hpp"
#include "constop/rng.hpp"

namespace constop {
namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::vector<SignalSpec> resolve_signals(const Dataset& dataset, const SweepSpec& spec) {
  if (!spec.signals.empty()) return spec.signals;
  std::vector<SignalSpec> out;
  out.reserve(dataset.signal_catalog.size());
  for (const std::string& name : dataset.signal_catalog) {
    out.push_back(SignalSpec{name, Orientation::higher_confident, Transform::identity()});
  }
  if (out.empty()) throw std::invalid_argument("dataset has no signal channels");
  return out;
}

std::vector<double> resolve_epsilons(const SweepSpec& spec) {
  const std::vector<double> eps = spec.epsilons.empty() ? default_epsilons() : spec.epsilons;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] >= 0.0 && eps[i] <= 1.0)) {
      throw std::invalid_argument("epsilons must lie in [0, 1]");
    }
    if (i > 0 && eps[i] < eps[i - 1]) {
      throw std::invalid_argument("epsilons must be sorted ascending");
    }
  }
  return eps;
}

struct DeployMetrics {
  double risk = kNan;
  double efficiency = kNan;
  std::int64_t total_tokens = 0;
  double accuracy = kNan;
  double abstention = kNan;
  double accuracy_unabstained = kNan;
  std::int64_t triggers[2][3] = {};  // [solvable? 0 : 1][upper/lower/budget]
};

DeployMetrics deploy(const std::vector<PreparedTrajectory>& items,
                     const std::vector<std::size_t>& test_idx,
                     const std::function<ExitOutcome(const PreparedTrajectory&)>& exit_fn,
                     LossKind risk_loss, LossKind eff_loss) {
  DeployMetrics m;
  const std::size_t n = test_idx.size();
  std::vector<double> risk_losses(n);
  std::vector<double> eff_losses(n);
  std::int64_t emitted_correct = 0;
  std::int64_t abstained = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const PreparedTrajectory& p = items[test_idx[k]];
    const ExitOutcome outcome = exit_fn(p);
    risk_losses[k] = prepared_loss(risk_loss, p, outcome);
    eff_losses[k] = prepared_loss(eff_loss, p, outcome);
    m.total_tokens += outcome.tokens_used;
    const bool abstain = outcome.trigger == ExitTrigger::lower;
    if (abstain) ++abstained;
    if (!abstain && outcome.correct_at_exit) ++emitted_correct;
    ++m.triggers[p.solvable() ? 0 : 1][static_cast<int>(outcome.trigger)];
  }
  m.risk = stable_mean(std::move(risk_losses));
  m.efficiency = stable_mean(std::move(eff_losses));
  m.accuracy = static_cast<double>(emitted_correct) / static_cast<double>(n);
  m.abstention = static_cast<double>(abstained) / static_cast<double>(n);
  m.accuracy_unabstained =
      abstained == static_cast<std::int64_t>(n)
          ? kNan
          : static_cast<double>(emitted_correct) / static_cast<double>(n - abstained);
  return m;
}

void fill_metrics(SweepRow& row, const DeployMetrics& m) {
  row.test_risk = m.risk;
  row.test_efficiency = m.efficiency;
  row.total_tokens = m.total_tokens;
  row.accuracy = m.accuracy;
  row.abstention_fraction = m.abstention;
  row.accuracy_unabstained = m.accuracy_unabstained;
  row.triggers_upper_solvable = m.triggers[0][0];
  row.triggers_upper_unsolvable = m.triggers[1][0];
  row.triggers_lower_solvable = m.triggers[0][1];
  row.triggers_lower_unsolvable = m.triggers[1][1];
  row.triggers_budget_solvable = m.triggers[0][2];
  row.triggers_budget_unsolvable = m.triggers[1][2];
}

SweepRow blank_row(double epsilon, Correction correction, std::uint64_t split_seed) {
  SweepRow row;
  row.epsilon = epsilon;
  row.correction = correction_name(correction);
  row.split_seed = split_seed;
  row.signal_selected = "none";
  row.parameter = kNan;
  row.validation_risk = kNan;
  row.test_risk = kNan;
  row.test_efficiency = kNan;
  row.accuracy = kNan;
  row.abstention_fraction = kNan;
  row.accuracy_unabstained = kNan;
  row.lambda_plus = kNan;
  return row;
}

std::function<ExitOutcome(const PreparedTrajectory&)> upper_exit_fn(double lambda_plus) {
  return [lambda_plus](const PreparedTrajectory& p) {
    return combine_exits(prepared_upper_exit(p, lambda_plus), std::nullopt, p);
  };
}

std::function<ExitOutcome(const PreparedTrajectory&)> lower_exit_fn(double c) {
  return [c](const PreparedTrajectory& p) {
    return combine_exits(std::nullopt, prepared_lower_exit(p, c, std::nullopt, std::nullopt),
                         p);
  };
}

std::function<ExitOutcome(const PreparedTrajectory&)> dual_exit_fn(double lambda_plus,
                                                                   double c) {
  return [lambda_plus, c](const PreparedTrajectory& p) {
    return combine_exits(prepared_upper_exit(p, lambda_plus),
                         prepared_lower_exit(p, c, lambda_plus, std::nullopt), p);
  };
}

// Shared calibrate-and-deploy loop; `side` picks the loss pair and the
// deployed single-threshold policy.
std::vector<SweepRow> single_threshold_sweep(const Dataset& val_source,
                                             const std::vector<std::size_t>* fixed_test,
                                             const PreparedBySignal* test_prepared,
                                             const SweepSpec& spec, RiskSide side) {
  const std::vector<SignalSpec> signals = resolve_signals(val_source, spec);
  const std::vector<double> epsilons = resolve_epsilons(spec);
  if (spec.splits <= 0) throw std::invalid_argument("splits must be positive");
  const Side cal_side = side == RiskSide::upper_fp ? Side::upper : Side::lower;
  const LossKind risk_loss = side == RiskSide::upper_fp ? LossKind::false_positive_upper
                                                        : LossKind::false_negative_lower;
  const LossKind eff_loss = side == RiskSide::upper_fp ? LossKind::efficiency_upper
                                                       : LossKind::efficiency_lower;
  const PreparedBySignal prepared = prepare_signals(val_source, signals, spec.workers);
  const PreparedBySignal& deploy_prepared = test_prepared ? *test_prepared : prepared;

  const std::size_t splits = static_cast<std::size_t>(spec.splits);
  // cells[split][correction][epsilon]
  std::vector<std::vector<std::vector<SweepRow>>> cells(splits);
  parallel_for(splits, spec.workers, [&](std::size_t j) {
    const std::uint64_t split_seed = derive_seed(spec.seed, j);
    const SplitIndices idx =
        split_indices(val_source.size(), spec.validation_size, split_seed);
    const std::vector<std::size_t>& test_idx = fixed_test ? *fixed_test : idx.test;
    const CandidateGrid grid = build_grid(subset(val_source, idx.validation), signals,
                                          spec.grid, spec.lower_grid_count);
    const CandidateTable table = evaluate_candidates(signals, prepared, idx.validation, grid,
                                                     cal_side, std::nullopt, 1);
    auto& split_cells = cells[j];
    split_cells.resize(spec.corrections.size());
    for (std::size_t ci = 0; ci < spec.corrections.size(); ++ci) {
      const Correction correction = spec.corrections[ci];
      for (double epsilon : epsilons) {
        SweepRow row = blank_row(epsilon, correction, split_seed);
        const std::optional<std::size_t> sel =
            select_candidate(table, epsilon, correction, spec.delta);
        if (sel) {
          const CandidateEval& cand = table.rows[*sel];
          row.signal_selected = cand.signal;
          row.parameter = cand.parameter;
          row.validation_risk = cand.empirical;
          const auto exit_fn = cal_side == Side::upper ? upper_exit_fn(cand.parameter)
                                                       : lower_exit_fn(cand.parameter);
          fill_metrics(row, deploy(deploy_prepared.at(cand.signal), test_idx, exit_fn,
                                   risk_loss, eff_loss));
        }
        split_cells[ci].push_back(std::move(row));
      }
    }
  });

  std::vector<SweepRow> rows;
  rows.reserve(epsilons.size() * spec.corrections.size() * splits);
  for (std::size_t ei = 0; ei < epsilons.size(); ++ei) {
    for (std::size_t ci = 0; ci < spec.corrections.size(); ++ci) {
      for (std::size_t j = 0; j < splits; ++j) {
        rows.push_back(cells[j][ci][ei]);
      }
    }
  }
  return rows;
}

std::vector<SweepRow> dual_sweep(const Dataset& dataset, const SweepSpec& spec) {
  const std::vector<SignalSpec> signals = resolve_signals(dataset, spec);
  const std::vector<double> epsilons = resolve_epsilons(spec);
  const PreparedBySignal prepared = prepare_signals(dataset, signals, spec.workers);

  const std::size_t splits = static_cast<std::size_t>(spec.splits);
  std::vector<std::vector<std::vector<SweepRow>>> cells(splits);
  parallel_for(splits, spec.workers, [&](std::size_t j) {
    const std::uint64_t split_seed = derive_seed(spec.seed, j);
    const SplitIndices idx = split_indices(dataset.size(), spec.validation_size, split_seed);
    const CandidateGrid grid = build_grid(subset(dataset, idx.validation), signals, spec.grid,
                                          spec.lower_grid_count);
    const CandidateTable upper_table =
        evaluate_candidates(signals, prepared, idx.validation, grid, Side::upper,
                            std::nullopt, 1);
    auto& split_cells = cells[j];
    split_cells.resize(spec.corrections.size());
    for (std::size_t ci = 0; ci < spec.corrections.size(); ++ci) {
      const Correction correction = spec.corrections[ci];
      std::optional<std::size_t> upper_sel;
      if (spec.dual_upper == DualUpperRule::min_validation_risk) {
        upper_sel = min_risk_candidate(upper_table);
      } else {
        upper_sel = select_candidate(upper_table, spec.eps_plus, correction, spec.delta);
      }
      if (!upper_sel) {
        for (double epsilon : epsilons) {
          split_cells[ci].push_back(blank_row(epsilon, correction, split_seed));
        }
        continue;
      }
      const std::string upper_signal = upper_table.rows[*upper_sel].signal;
      const double lambda_plus = upper_table.rows[*upper_sel].parameter;
      const auto spec_it =
          std::find_if(signals.begin(), signals.end(),
                       [&](const SignalSpec& s) { return s.name == upper_signal; });
      const std::vector<SignalSpec> lower_signals = {*spec_it};
      const CandidateTable lower_table =
          evaluate_candidates(lower_signals, prepared, idx.validation, grid, Side::lower,
                              lambda_plus, 1);
      for (double epsilon : epsilons) {
        SweepRow row = blank_row(epsilon, correction, split_seed);
        row.lambda_plus = lambda_plus;
        const std::optional<std::size_t> sel =
            select_candidate(lower_table, epsilon, correction, spec.delta);
        if (sel) {
          const CandidateEval& cand = lower_table.rows[*sel];
          row.signal_selected = cand.signal;
          row.parameter = cand.parameter;
          row.validation_risk = cand.empirical;
          fill_metrics(row, deploy(prepared.at(cand.signal), idx.test,
                                   dual_exit_fn(lambda_plus, cand.parameter),
                                   LossKind::false_negative_lower,
                                   LossKind::efficiency_lower));
        }
        split_cells[ci].push_back(std::move(row));
      }
    }
  });

  std::vector<SweepRow> rows;
  rows.reserve(epsilons.size() * spec.corrections.size() * splits);
  for (std::size_t ei = 0; ei < epsilons.size(); ++ei) {
    for (std::size_t ci = 0; ci < spec.corrections.size(); ++ci) {
      for (std::size_t j = 0; j < splits; ++j) {
        rows.push_back(cells[j][ci][ei]);
      }
    }
  }
  return rows;
}

std::vector<SweepRow> budget_baseline_sweep(const Dataset& dataset, const SweepSpec& spec) {
  const std::vector<SignalSpec> signals = resolve_signals(dataset, spec);
  const PreparedBySignal prepared = prepare_signals(dataset, signals, spec.workers);
  const std::vector<PreparedTrajectory>& items = prepared.at(signals.front().name);
  int max_steps = 0;
  for (const auto& p : items) max_steps = std::max(max_steps, p.T);

  const std::size_t splits = static_cast<std::size_t>(spec.splits);
  std::vector<std::vector<SweepRow>> cells(splits);
  parallel_for(splits, spec.workers, [&](std::size_t j) {
    const std::uint64_t split_seed = derive_seed(spec.seed, j);
    const SplitIndices idx = split_indices(dataset.size(), spec.validation_size, split_seed);
    for (int cutoff = 1; cutoff <= max_steps; ++cutoff) {
      SweepRow row = blank_row(kNan, spec.corrections.empty() ? Correction::naive
                                                              : spec.corrections.front(),
                               split_seed);
      row.correction = "none";
      row.signal_selected = "budget";
      row.parameter = cutoff;
      const auto exit_fn = [cutoff](const PreparedTrajectory& p) {
        const int step = std::min(cutoff, p.T);
        ExitOutcome out;
        out.exit_step = step;
        out.trigger = ExitTrigger::budget;
        out.tokens_used = p.cum_tokens[step - 1];
        out.correct_at_exit = p.correct[step - 1] != 0;
        return out;
      };
      DeployMetrics m = deploy(items, idx.test, exit_fn, LossKind::false_positive_upper,
                               LossKind::efficiency_upper);
      m.risk = kNan;        // no threshold, no correctness risk attached
      m.efficiency = kNan;
      fill_metrics(row, m);
      cells[j].push_back(std::move(row));
    }
  });

  std::vector<SweepRow> rows;
  rows.reserve(static_cast<std::size_t>(max_steps) * splits);
  for (int cutoff = 0; cutoff < max_steps; ++cutoff) {
    for (std::size_t j = 0; j < splits; ++j) {
      rows.push_back(cells[j][static_cast<std::size_t>(cutoff)]);
    }
  }
  return rows;
}

}  // namespace

std::vector<double> default_epsilons() {
  std::vector<double> eps;
  eps.reserve(101);
  for (int i = 0; i <= 100; ++i) eps.push_back(static_cast<double>(i) / 100.0);
  return eps;
}

std::vector<SweepRow> coverage_sweep(const Dataset& dataset, const SweepSpec& spec,
                                     RiskSide side) {
  return single_threshold_sweep(dataset, nullptr, nullptr, spec, side);
}

std::vector<SweepRow> efficiency_sweep(const Dataset& dataset, const SweepSpec& spec,
                                       EfficiencyMode mode) {
  switch (mode) {
    case EfficiencyMode::upper_only:
      return single_threshold_sweep(dataset, nullptr, nullptr, spec, RiskSide::upper_fp);
    case EfficiencyMode::lower_only:
      return single_threshold_sweep(dataset, nullptr, nullptr, spec, RiskSide::lower_fn);
    case EfficiencyMode::dual:
      return dual_sweep(dataset, spec);
    case EfficiencyMode::fixed_token_budget:
      return budget_baseline_sweep(dataset, spec);
  }
  throw std::logic_error("unreachable efficiency mode");
}

std::vector<SweepRow> ablation_shift(const Dataset& validation_source,
                                     const Dataset& test_source, const SweepSpec& spec,
                                     RiskSide side) {
  const std::vector<SignalSpec> signals = resolve_signals(validation_source, spec);
  for (const SignalSpec& s : signals) {
    if (!dataset_has_signal(test_source, s.name)) {
      throw std::invalid_argument("ablation_shift: signal '" + s.name +
                                  "' missing from the test source catalog");
    }
  }
  SweepSpec resolved = spec;
  resolved.signals = signals;
  const PreparedBySignal test_prepared =
      prepare_signals(test_source, signals, spec.workers);
  std::vector<std::size_t> all_test(test_source.size());
  std::iota(all_test.begin(), all_test.end(), std::size_t{0});
  return single_threshold_sweep(validation_source, &all_test, &test_prepared, resolved, side);
}

std::optional<SweepRow> pick_operating_point(const std::vector<SweepRow>& rows) {
  std::vector<double> accuracies;
  for (const SweepRow& row : rows) {
    if (row.feasible() && std::isfinite(row.accuracy)) accuracies.push_back(row.accuracy);
  }
  if (accuracies.empty()) return std::nullopt;
  std::sort(accuracies.begin(), accuracies.end(), std::greater<>());
  accuracies.erase(std::unique(accuracies.begin(), accuracies.end()), accuracies.end());
  const double target = accuracies.size() >= 2 ? accuracies[1] : accuracies[0];
  std::optional<SweepRow> best;
  for (const SweepRow& row : rows) {
    if (!row.feasible() || !std::isfinite(row.accuracy) || row.accuracy != target) continue;
    if (!best || row.total_tokens < best->total_tokens) best = row;
  }
  return best;
}

const char* const kSweepCsvHeader =
    "epsilon,correction,split_seed,signal_selected,parameter,validation_risk,test_risk,"
    "test_efficiency,total_tokens,accuracy,abstention_fraction,triggers_upper_solvable,"
    "triggers_upper_unsolvable,triggers_lower_solvable,triggers_lower_unsolvable,"
    "triggers_budget_solvable,triggers_budget_unsolvable,accuracy_unabstained,lambda_plus";

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_rows_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path.string());
  out << kSweepCsvHeader << '\n';
  for (const SweepRow& r : rows) {
    out << fmt_double(r.epsilon) << ',' << r.correction << ',' << r.split_seed << ','
        << r.signal_selected << ',' << fmt_double(r.parameter) << ','
        << fmt_double(r.validation_risk) << ',' << fmt_double(r.test_risk) << ','
        << fmt_double(r.test_efficiency) << ',' << r.total_tokens << ','
        << fmt_double(r.accuracy) << ',' << fmt_double(r.abstention_fraction) << ','
        << r.triggers_upper_solvable << ',' << r.triggers_upper_unsolvable << ','
        << r.triggers_lower_solvable << ',' << r.triggers_lower_unsolvable << ','
        << r.triggers_budget_solvable << ',' << r.triggers_budget_unsolvable << ','
        << fmt_double(r.accuracy_unabstained) << ',' << fmt_double(r.lambda_plus) << '\n';
  }
}

std::vector<SweepRow> read_rows_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sweep file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty sweep file: " + path.string());
  if (line != kSweepCsvHeader) {
    throw std::runtime_error("unexpected sweep header in " + path.string());
  }
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 19) {
      throw std::runtime_error("bad sweep row with " + std::to_string(fields.size()) +
                               " fields");
    }
    SweepRow r;
    r.epsilon = std::strtod(fields[0].c_str(), nullptr);
    r.correction = fields[1];
    r.split_seed = std::strtoull(fields[2].c_str(), nullptr, 10);
    r.signal_selected = fields[3];
    r.parameter = std::strtod(fields[4].c_str(), nullptr);
    r.validation_risk = std::strtod(fields[5].c_str(), nullptr);
    r.test_risk = std::strtod(fields[6].c_str(), nullptr);
    r.test_efficiency = std::strtod(fields[7].c_str(), nullptr);
    r.total_tokens = std::strtoll(fields[8].c_str(), nullptr, 10);
    r.accuracy = std::strtod(fields[9].c_str(), nullptr);
    r.abstention_fraction = std::strtod(fields[10].c_str(), nullptr);
    r.triggers_upper_solvable = std::strtoll(fields[11].c_str(), nullptr, 10);
    r.triggers_upper_unsolvable = std::strtoll(fields[12].c_str(), nullptr, 10);
    r.triggers_lower_solvable = std::strtoll(fields[13].c_str(), nullptr, 10);
    r.triggers_lower_unsolvable = std::strtoll(fields[14].c_str(), nullptr, 10);
    r.triggers_budget_solvable = std::strtoll(fields[15].c_str(), nullptr, 10);
    r.triggers_budget_unsolvable = std::strtoll(fields[16].c_str(), nullptr, 10);
    r.accuracy_unabstained = std::strtod(fields[17].c_str(), nullptr);
    r.lambda_plus = std::strtod(fields[18].c_str(), nullptr);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<SweepSummary> summarize(const std::vector<SweepRow>& rows) {
  struct Accum {
    SweepSummary summary;
    std::vector<double> risks;
    double acc_sum = 0.0, tokens_sum = 0.0, abst_sum = 0.0;
    std::size_t violations = 0;
  };
  std::vector<Accum> groups;
  auto find_group = [&](const SweepRow& row) -> Accum& {
    const std::string eps_key = fmt_double(row.epsilon);
    for (Accum& g : groups) {
      if (fmt_double(g.summary.epsilon) == eps_key && g.summary.correction == row.correction) {
        return g;
      }
    }
    groups.emplace_back();
    groups.back().summary.epsilon = row.epsilon;
    groups.back().summary.correction = row.correction;
    return groups.back();
  };
  for (const SweepRow& row : rows) {
    Accum& g = find_group(row);
    ++g.summary.rows;
    if (!row.feasible()) continue;
    ++g.summary.feasible;
    if (std::isfinite(row.test_risk)) {
      g.risks.push_back(row.test_risk);
      if (row.test_risk > row.epsilon) ++g.violations;
    }
    g.acc_sum += row.accuracy;
    g.tokens_sum += static_cast<double>(row.total_tokens);
    g.abst_sum += row.abstention_fraction;
  }
  std::vector<SweepSummary> out;
  out.reserve(groups.size());
  for (Accum& g : groups) {
    SweepSummary& s = g.summary;
    const double n_feasible = static_cast<double>(s.feasible);
    if (!g.risks.empty()) {
      s.mean_test_risk = stable_mean(g.risks);
      double var = 0.0;
      for (double r : g.risks) var += (r - s.mean_test_risk) * (r - s.mean_test_risk);
      s.stdev_test_risk = std::sqrt(var / static_cast<double>(g.risks.size()));
    } else {
      s.mean_test_risk = kNan;
      s.stdev_test_risk = kNan;
    }
    s.violation_fraction = static_cast<double>(g.violations) / static_cast<double>(s.rows);
    s.mean_accuracy = s.feasible ? g.acc_sum / n_feasible : kNan;
    s.mean_total_tokens = s.feasible ? g.tokens_sum / n_feasible : kNan;
    s.mean_abstention = s.feasible ? g.abst_sum / n_feasible : kNan;
    out.push_back(s);
  }
  return out;
}

void write_summary_csv(const std::vector<SweepSummary>& summaries,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path.string());
  out << "epsilon,correction,rows,feasible,mean_test_risk,stdev_test_risk,"
         "violation_fraction,mean_accuracy,mean_total_tokens,mean_abstention\n";
  for (const SweepSummary& s : summaries) {
    out << fmt_double(s.epsilon) << ',' << s.correction << ',' << s.rows << ',' << s.feasible
        << ',' << fmt_double(s.mean_test_risk) << ',' << fmt_double(s.stdev_test_risk) << ','
        << fmt_double(s.violation_fraction) << ',' << fmt_double(s.mean_accuracy) << ','
        << fmt_double(s.mean_total_tokens) << ',' << fmt_double(s.mean_abstention) << '\n';
  }
}

std::string manifest_record(const std::string& kind, const SweepSpec& spec,
                            const std::vector<std::pair<std::string, std::string>>& inputs,
                            std::size_t row_count) {
  nlohmann::json spec_json;
  spec_json["epsilons"] = spec.epsilons.empty() ? default_epsilons() : spec.epsilons;
  spec_json["splits"] = spec.splits;
  spec_json["validation_size"] = spec.validation_size;
  {
    std::vector<std::string> names;
    for (Correction c : spec.corrections) names.push_back(correction_name(c));
    spec_json["corrections"] = names;
  }
  spec_json["seed"] = spec.seed;
  {
    nlohmann::json sigs = nlohmann::json::array();
    for (const SignalSpec& s : spec.signals) {
      sigs.push_back({{"name", s.name},
                      {"orientation", orientation_name(s.orientation)},
                      {"transform", s.transform.kind == Transform::Kind::ema ? "ema" : "identity"},
                      {"alpha", s.transform.alpha}});
    }
    spec_json["signals"] = std::move(sigs);
  }
  spec_json["grid"] = {{"mode", spec.grid.kind == GridMode::Kind::uniform ? "uniform" : "quantile"},
                       {"count", spec.grid.count}};
  spec_json["lower_grid_count"] = spec.lower_grid_count;
  spec_json["delta"] = spec.delta;
  spec_json["dual_upper"] = spec.dual_upper == DualUpperRule::min_validation_risk
                                ? "min_validation_risk"
                                : "calibrated";
  spec_json["eps_plus"] = spec.eps_plus;

  nlohmann::json inputs_json = nlohmann::json::array();
  for (const auto& [path, digest] : inputs) {
    inputs_json.push_back({{"path", path}, {"digest", digest}});
  }
  const nlohmann::json manifest = {{"type", "sweep_manifest"},
                                   {"kind", kind},
                                   {"spec", std::move(spec_json)},
                                   {"inputs", std::move(inputs_json)},
                                   {"rows", row_count}};
  return manifest.dump();
}

}  // namespace constop
