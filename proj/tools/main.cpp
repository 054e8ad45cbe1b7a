// conformal-stop: calibrate early-stopping thresholds for step-wise
// reasoning trajectories under a user-specified risk tolerance, generate
// synthetic trajectory populations, and run sweep protocols.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "constop/calibrate.hpp"
#include "constop/dataset_io.hpp"
#include "constop/harness.hpp"
#include "constop/parallel.hpp"
#include "constop/synth.hpp"

namespace {

using namespace constop;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInfeasible = 3;

SignalSpec parse_signal_arg(const std::string& arg) {
  SignalSpec spec;
  std::size_t start = 0;
  std::vector<std::string> parts;
  while (start <= arg.size()) {
    const std::size_t pos = arg.find(':', start);
    if (pos == std::string::npos) {
      parts.push_back(arg.substr(start));
      break;
    }
    parts.push_back(arg.substr(start, pos - start));
    start = pos + 1;
  }
  if (parts.empty() || parts.front().empty()) {
    throw CLI::ValidationError("--signal", "empty signal name");
  }
  spec.name = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const std::string& part = parts[i];
    if (part == "lower" || part == "lower_confident") {
      spec.orientation = Orientation::lower_confident;
    } else if (part == "higher" || part == "higher_confident") {
      spec.orientation = Orientation::higher_confident;
    } else if (part.rfind("ema=", 0) == 0) {
      spec.transform = Transform::ema(std::stod(part.substr(4)));
    } else {
      throw CLI::ValidationError("--signal", "unknown signal modifier '" + part + "'");
    }
  }
  return spec;
}

std::vector<SignalSpec> parse_signal_args(const std::vector<std::string>& args) {
  std::vector<SignalSpec> specs;
  specs.reserve(args.size());
  for (const std::string& a : args) specs.push_back(parse_signal_arg(a));
  return specs;
}

GridMode parse_grid_arg(const std::string& arg) {
  GridMode mode;
  const std::size_t pos = arg.find(':');
  const std::string kind = pos == std::string::npos ? arg : arg.substr(0, pos);
  if (kind == "uniform") {
    mode.kind = GridMode::Kind::uniform;
  } else if (kind == "quantile") {
    mode.kind = GridMode::Kind::quantile;
  } else {
    throw CLI::ValidationError("--grid", "expected uniform:N or quantile:N");
  }
  if (pos != std::string::npos) mode.count = std::stoi(arg.substr(pos + 1));
  if (mode.count < 1) throw CLI::ValidationError("--grid", "grid count must be positive");
  return mode;
}

// "a:b:step" inclusive range, or a comma-separated list, or a single value.
std::vector<double> parse_epsilons_arg(const std::string& arg) {
  std::vector<double> out;
  if (arg.find(':') != std::string::npos) {
    double a = 0.0, b = 0.0, step = 0.0;
    if (std::sscanf(arg.c_str(), "%lf:%lf:%lf", &a, &b, &step) != 3 || step <= 0.0) {
      throw CLI::ValidationError("--epsilons", "expected start:end:step");
    }
    const int n = static_cast<int>(std::llround((b - a) / step));
    for (int i = 0; i <= n; ++i) out.push_back(a + static_cast<double>(i) * step);
    return out;
  }
  std::size_t start = 0;
  while (start <= arg.size()) {
    const std::size_t pos = arg.find(',', start);
    const std::string item =
        pos == std::string::npos ? arg.substr(start) : arg.substr(start, pos - start);
    if (!item.empty()) out.push_back(std::stod(item));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  if (out.empty()) throw CLI::ValidationError("--epsilons", "no epsilon values given");
  return out;
}

std::vector<Correction> parse_corrections(const std::vector<std::string>& args) {
  std::vector<Correction> out;
  for (const std::string& a : args) out.push_back(correction_from_name(a));
  if (out.empty()) out.push_back(Correction::ucb);
  return out;
}

void write_resolved_config(CLI::App& app, const std::filesystem::path& out_path) {
  std::ofstream out(out_path.string() + ".config");
  if (!out) return;
  out << app.config_to_str(true, true);
}

nlohmann::json outcome_json(const CalibrationOutcome& outcome, const std::string& stage) {
  nlohmann::json j = {{"type", "calibration"},
                      {"stage", stage},
                      {"grid_size", outcome.grid_size},
                      {"feasible_count", outcome.feasible_set.size()}};
  if (outcome.selected) {
    j["selected_signal"] = outcome.selected->first;
    j["selected_parameter"] = outcome.selected->second;
    j["empirical_risk"] = outcome.empirical_risk;
    j["adjusted_risk"] = outcome.adjusted_risk;
    j["efficiency_estimate"] = outcome.efficiency_estimate;
  } else {
    j["selected_signal"] = nullptr;
    j["infeasible_reason"] = outcome.infeasible_reason.value_or("infeasible");
  }
  return j;
}

void write_outcome_report(std::ostream& out, const CalibrationOutcome& outcome,
                          const std::string& stage) {
  out << outcome_json(outcome, stage).dump() << '\n';
  for (const AuditRow& row : outcome.feasible_set) {
    const nlohmann::json j = {{"type", "feasible_row"},     {"stage", stage},
                              {"signal", row.signal},       {"parameter", row.parameter},
                              {"empirical_risk", row.empirical},
                              {"adjusted_risk", row.adjusted_risk},
                              {"efficiency", row.efficiency}};
    out << j.dump() << '\n';
  }
}

struct CommonArgs {
  std::string in_path;
  std::string out_path;
  std::uint64_t seed = 0;
  int workers = 0;
  std::vector<std::string> signal_args;
  std::string grid_arg = "uniform:64";
  std::vector<std::string> correction_args;
  double delta = 0.05;
};

std::vector<SignalSpec> signals_or_catalog(const std::vector<std::string>& signal_args,
                                           const Dataset& dataset) {
  if (!signal_args.empty()) return parse_signal_args(signal_args);
  std::vector<SignalSpec> specs;
  for (const std::string& name : dataset.signal_catalog) {
    specs.push_back(SignalSpec{name, Orientation::higher_confident, Transform::identity()});
  }
  if (specs.empty()) throw std::runtime_error("dataset has no signal channels");
  return specs;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Risk-controlled early stopping for step-wise reasoning trajectories"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from an INI/TOML file (CLI overrides)");

  // ---- generate ----
  auto* gen = app.add_subcommand("generate", "Generate a synthetic trajectory population");
  SynthConfig synth;
  std::string gen_out;
  int gen_workers = 0;
  double gen_midpoint = -1.0;
  synth.steps = 20;
  synth.tokens_per_step = 100;
  synth.solvable.steepness = 0.5;
  synth.solvable.noise_stdev = 0.05;
  synth.unsolvable.mean_level = 0.3;
  synth.unsolvable.noise_stdev = 0.1;
  gen->add_option("--out", gen_out, "Output trajectory file")->required();
  gen->add_option("--seed", synth.seed, "Generator seed")->required();
  gen->add_option("--population", synth.population, "Number of trajectories")->required();
  gen->add_option("--solvable-fraction", synth.solvable_fraction,
                  "Fraction of solvable instances")
      ->check(CLI::Range(0.0, 1.0))
      ->required();
  gen->add_option("--steps", synth.steps, "Reasoning steps per trajectory (T)");
  gen->add_option("--tokens-per-step", synth.tokens_per_step, "Tokens consumed per step");
  gen->add_option("--budget-tokens", synth.budget_tokens,
                  "Token budget B (default steps * tokens-per-step)");
  gen->add_option("--solvable-midpoint", gen_midpoint,
                  "Step where the solvable drift crosses 0.5 (default 0.4 * steps)");
  gen->add_option("--solvable-steepness", synth.solvable.steepness, "Logistic slope per step");
  gen->add_option("--solvable-noise", synth.solvable.noise_stdev, "Solvable signal noise");
  gen->add_option("--unsolvable-level", synth.unsolvable.mean_level,
                  "Unsolvable signal mean level");
  gen->add_option("--unsolvable-noise", synth.unsolvable.noise_stdev,
                  "Unsolvable signal noise");
  gen->add_option("--guess-prob", synth.unsolvable.guess_prob,
                  "Per-step spurious-correct probability on unsolvable instances")
      ->check(CLI::Range(0.0, 1.0));
  gen->add_option("--flicker-prob", synth.flicker_prob,
                  "Per-step flip-back probability after convergence");
  gen->add_option("--signal-name", synth.signal_name, "Name of the emitted channel");
  gen->add_option("--workers", gen_workers,
                  "Worker threads (0 = CONFORMAL_STOP_WORKERS or hardware)");

  // ---- ingest-check ----
  auto* check = app.add_subcommand("ingest-check", "Validate a trajectory file");
  std::string check_in;
  bool check_lenient = false;
  check->add_option("--in", check_in, "Trajectory file")->required();
  check->add_flag("--lenient", check_lenient, "Drop and report bad records instead of failing");

  // ---- calibrate ----
  auto* cal = app.add_subcommand("calibrate", "Select thresholds for a risk tolerance");
  CommonArgs cal_args;
  std::string cal_mode = "upper";
  double cal_epsilon = -1.0;
  double cal_eps_plus = -1.0;
  double cal_eps_minus = -1.0;
  cal->add_option("--in", cal_args.in_path, "Validation trajectory file")->required();
  cal->add_option("--out", cal_args.out_path, "Calibration report file (JSON lines)");
  cal->add_option("--mode", cal_mode, "upper | lower | dual")
      ->check(CLI::IsMember({"upper", "lower", "dual"}));
  cal->add_option("--epsilon", cal_epsilon, "Risk tolerance (upper/lower modes)");
  cal->add_option("--eps-plus", cal_eps_plus, "False-positive tolerance (dual mode)");
  cal->add_option("--eps-minus", cal_eps_minus, "False-negative tolerance (dual mode)");
  cal->add_option("--delta", cal_args.delta, "Confidence level for the correction");
  cal->add_option("--correction", cal_args.correction_args,
                  "naive | ucb | ucb-union (default ucb)");
  cal->add_option("--signal", cal_args.signal_args,
                  "Signal channel, repeatable: name[:lower][:ema=A]");
  cal->add_option("--grid", cal_args.grid_arg, "uniform:N | quantile:N");
  cal->add_option("--workers", cal_args.workers,
                  "Worker threads (0 = CONFORMAL_STOP_WORKERS or hardware)");

  // ---- sweep ----
  auto* sweep = app.add_subcommand("sweep", "Run a calibrate/deploy sweep protocol");
  CommonArgs sweep_args;
  std::string sweep_kind = "coverage";
  std::string sweep_mode = "upper";
  std::string sweep_epsilons = "0:1:0.01";
  std::string sweep_test_in;
  std::string sweep_dual_upper = "min-risk";
  int sweep_splits = 40;
  std::size_t sweep_validation = 50;
  double sweep_eps_plus = 0.1;
  bool sweep_seed_set = false;
  sweep->add_option("--in", sweep_args.in_path, "Trajectory file")->required();
  sweep->add_option("--out", sweep_args.out_path, "Output rows file (CSV)")->required();
  sweep
      ->add_option_function<std::uint64_t>(
          "--seed",
          [&](std::uint64_t v) {
            sweep_args.seed = v;
            sweep_seed_set = true;
          },
          "Master seed for split generation")
      ->required();
  sweep->add_option("--sweep", sweep_kind, "coverage | efficiency | shift")
      ->check(CLI::IsMember({"coverage", "efficiency", "shift"}));
  sweep->add_option("--mode", sweep_mode, "upper | lower | dual | budget")
      ->check(CLI::IsMember({"upper", "lower", "dual", "budget"}));
  sweep->add_option("--epsilons", sweep_epsilons, "start:end:step or comma list");
  sweep->add_option("--splits", sweep_splits, "Number of validation-test splits");
  sweep->add_option("--validation-size", sweep_validation, "Validation set size per split");
  sweep->add_option("--correction", sweep_args.correction_args,
                    "naive | ucb | ucb-union, repeatable");
  sweep->add_option("--delta", sweep_args.delta, "Confidence level for the correction");
  sweep->add_option("--signal", sweep_args.signal_args,
                    "Signal channel, repeatable: name[:lower][:ema=A]");
  sweep->add_option("--grid", sweep_args.grid_arg, "uniform:N | quantile:N");
  sweep->add_option("--test-in", sweep_test_in, "Test-source file (shift sweeps)");
  sweep->add_option("--dual-upper", sweep_dual_upper,
                    "Upper fixing rule for dual sweeps: min-risk | calibrated")
      ->check(CLI::IsMember({"min-risk", "calibrated"}));
  sweep->add_option("--eps-plus", sweep_eps_plus,
                    "Upper-stage tolerance when --dual-upper calibrated");
  sweep->add_option("--workers", sweep_args.workers,
                    "Worker threads (0 = CONFORMAL_STOP_WORKERS or hardware)");

  // ---- report-summary ----
  auto* report = app.add_subcommand("report-summary", "Aggregate sweep rows across splits");
  std::string report_in;
  std::string report_out;
  bool report_operating_point = false;
  report->add_option("--in", report_in, "Sweep rows file (CSV)")->required();
  report->add_option("--out", report_out, "Summary output file (CSV)");
  report->add_flag("--operating-point", report_operating_point,
                   "Print the second-highest-accuracy operating point");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      if (synth.budget_tokens == 0) {
        synth.budget_tokens =
            static_cast<std::int64_t>(synth.steps) * synth.tokens_per_step;
      }
      synth.solvable.drift_midpoint_step =
          gen_midpoint > 0.0 ? gen_midpoint : 0.4 * synth.steps;
      const Dataset dataset = generate(synth, gen_workers);
      emit(dataset, gen_out);
      write_resolved_config(app, gen_out);
      std::cout << "wrote " << dataset.size() << " trajectories to " << gen_out << "\n";
      return kExitOk;
    }

    if (*check) {
      const Strictness strictness =
          check_lenient ? Strictness::lenient : Strictness::strict;
      const IngestResult result = ingest(check_in, strictness);
      std::cout << "accepted " << result.dataset.size() << " trajectories, dropped "
                << result.dropped.size() << "\n";
      for (const DropRecord& drop : result.dropped) {
        std::cout << "  line " << drop.line << " (" << (drop.id.empty() ? "?" : drop.id)
                  << "): " << drop.reason << "\n";
      }
      return kExitOk;
    }

    if (*cal) {
      const Dataset dataset = ingest(cal_args.in_path).dataset;
      const std::vector<SignalSpec> signals =
          signals_or_catalog(cal_args.signal_args, dataset);
      const GridMode grid_mode = parse_grid_arg(cal_args.grid_arg);
      const CandidateGrid grid = build_grid(dataset, signals, grid_mode);
      const Correction correction = parse_corrections(cal_args.correction_args).front();
      std::ostringstream report_text;
      bool feasible = false;

      if (cal_mode == "dual") {
        if (cal_eps_plus < 0.0 || cal_eps_minus < 0.0) {
          throw std::runtime_error("dual mode needs --eps-plus and --eps-minus");
        }
        if (signals.size() != 1) {
          throw std::runtime_error("dual mode calibrates a single --signal");
        }
        const DualOutcome outcome =
            calibrate_dual(dataset, signals.front(), grid, grid,
                           {cal_eps_plus, cal_eps_minus, cal_args.delta}, correction,
                           cal_args.workers);
        write_outcome_report(report_text, outcome.upper_stage, "upper");
        write_outcome_report(report_text, outcome.lower_stage, "lower");
        if (outcome.policy) {
          feasible = true;
          const nlohmann::json j = {{"type", "dual_policy"},
                                    {"signal", outcome.policy->upper.signal},
                                    {"lambda_plus", outcome.policy->upper.lambda_plus},
                                    {"c", outcome.policy->lower.c},
                                    {"cap", *outcome.policy->lower.cap}};
          report_text << j.dump() << '\n';
          std::cout << "selected signal=" << outcome.policy->upper.signal
                    << " lambda_plus=" << outcome.policy->upper.lambda_plus
                    << " c=" << outcome.policy->lower.c << "\n";
        } else {
          std::cout << "no feasible pair (stage: "
                    << (outcome.infeasible_stage == DualStage::upper ? "upper" : "lower")
                    << ")\n";
        }
      } else {
        if (cal_epsilon < 0.0) throw std::runtime_error("missing --epsilon");
        const bool upper = cal_mode == "upper";
        RiskBudget budget{upper ? LossKind::false_positive_upper
                                : LossKind::false_negative_lower,
                          cal_epsilon, cal_args.delta, correction};
        const CalibrationOutcome outcome = calibrate(
            dataset, signals, grid, budget,
            upper ? LossKind::efficiency_upper : LossKind::efficiency_lower,
            cal_args.workers);
        write_outcome_report(report_text, outcome, cal_mode);
        if (outcome.selected) {
          feasible = true;
          std::cout << "selected signal=" << outcome.selected->first
                    << " parameter=" << outcome.selected->second
                    << " adjusted_risk=" << outcome.adjusted_risk << "\n";
        } else {
          std::cout << "no feasible pair\n";
        }
      }
      if (!cal_args.out_path.empty()) {
        std::ofstream out(cal_args.out_path);
        if (!out) throw std::runtime_error("cannot open output file: " + cal_args.out_path);
        out << report_text.str();
        write_resolved_config(app, cal_args.out_path);
      }
      return feasible ? kExitOk : kExitInfeasible;
    }

    if (*sweep) {
      const Dataset dataset = ingest(sweep_args.in_path).dataset;
      SweepSpec spec;
      spec.epsilons = parse_epsilons_arg(sweep_epsilons);
      spec.splits = sweep_splits;
      spec.validation_size = sweep_validation;
      spec.corrections = parse_corrections(sweep_args.correction_args);
      spec.seed = sweep_args.seed;
      if (!sweep_args.signal_args.empty()) {
        spec.signals = parse_signal_args(sweep_args.signal_args);
      }
      spec.grid = parse_grid_arg(sweep_args.grid_arg);
      spec.delta = sweep_args.delta;
      spec.dual_upper = sweep_dual_upper == "calibrated" ? DualUpperRule::calibrated
                                                         : DualUpperRule::min_validation_risk;
      spec.eps_plus = sweep_eps_plus;
      spec.workers = sweep_args.workers;
      (void)sweep_seed_set;

      std::vector<SweepRow> rows;
      std::vector<std::pair<std::string, std::string>> inputs = {
          {sweep_args.in_path, file_digest(sweep_args.in_path)}};
      if (sweep_kind == "coverage") {
        if (sweep_mode != "upper" && sweep_mode != "lower") {
          throw std::runtime_error("coverage sweeps use --mode upper or lower");
        }
        rows = coverage_sweep(dataset, spec,
                              sweep_mode == "upper" ? RiskSide::upper_fp : RiskSide::lower_fn);
      } else if (sweep_kind == "efficiency") {
        EfficiencyMode mode = EfficiencyMode::upper_only;
        if (sweep_mode == "lower") mode = EfficiencyMode::lower_only;
        else if (sweep_mode == "dual") mode = EfficiencyMode::dual;
        else if (sweep_mode == "budget") mode = EfficiencyMode::fixed_token_budget;
        rows = efficiency_sweep(dataset, spec, mode);
      } else {
        if (sweep_test_in.empty()) throw std::runtime_error("shift sweeps need --test-in");
        if (sweep_mode != "upper" && sweep_mode != "lower") {
          throw std::runtime_error("shift sweeps use --mode upper or lower");
        }
        const Dataset test_source = ingest(sweep_test_in).dataset;
        inputs.emplace_back(sweep_test_in, file_digest(sweep_test_in));
        rows = ablation_shift(dataset, test_source, spec,
                              sweep_mode == "upper" ? RiskSide::upper_fp : RiskSide::lower_fn);
      }
      write_rows_csv(rows, sweep_args.out_path);
      std::ofstream manifest(sweep_args.out_path + ".manifest.jsonl");
      if (manifest) {
        manifest << manifest_record(sweep_kind + ":" + sweep_mode, spec, inputs, rows.size())
                 << '\n';
      }
      write_resolved_config(app, sweep_args.out_path);
      std::cout << "wrote " << rows.size() << " rows to " << sweep_args.out_path << "\n";
      return kExitOk;
    }

    if (*report) {
      const std::vector<SweepRow> rows = read_rows_csv(report_in);
      if (report_operating_point) {
        const std::optional<SweepRow> op = pick_operating_point(rows);
        if (!op) {
          std::cout << "no feasible operating point\n";
        } else {
          std::cout << "operating point: epsilon=" << op->epsilon
                    << " signal=" << op->signal_selected << " parameter=" << op->parameter
                    << " accuracy=" << op->accuracy << " total_tokens=" << op->total_tokens
                    << "\n";
        }
      }
      if (!report_out.empty()) {
        write_summary_csv(summarize(rows), report_out);
        write_resolved_config(app, report_out);
        std::cout << "wrote summary to " << report_out << "\n";
      }
      return kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitOk;
}
