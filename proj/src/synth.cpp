#include "constop/synth.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "constop/parallel.hpp"
#include "constop/rng.hpp"

namespace constop {
namespace {

constexpr double kMeanReversion = 0.7;  // AR(1) pull toward the unsolvable level

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Trajectory generate_one(const SynthConfig& cfg, std::size_t index, bool solvable) {
  Rng rng(derive_seed(cfg.seed, index));
  Trajectory traj;
  char id[32];
  std::snprintf(id, sizeof(id), "t%06zu", index);
  traj.id = id;
  traj.budget_tokens = cfg.budget_tokens;
  traj.steps.reserve(static_cast<std::size_t>(cfg.steps));

  // First step where the noiseless drift reaches 0.5, i.e. t >= midpoint.
  const int first_correct =
      static_cast<int>(std::ceil(cfg.solvable.drift_midpoint_step));

  double level = cfg.unsolvable.mean_level;
  for (int t = 1; t <= cfg.steps; ++t) {
    StepRecord step;
    step.step_index = t;
    step.cum_tokens = static_cast<std::int64_t>(t) * cfg.tokens_per_step;
    double value;
    if (solvable) {
      const double drift =
          logistic(cfg.solvable.steepness * (t - cfg.solvable.drift_midpoint_step));
      value = drift + cfg.solvable.noise_stdev * rng.normal();
      bool correct = t >= first_correct;
      if (correct && t > first_correct && cfg.flicker_prob > 0.0) {
        correct = !rng.bernoulli(cfg.flicker_prob);
      }
      step.correct = correct;
    } else {
      const double noise = cfg.unsolvable.noise_stdev * rng.normal();
      level = cfg.unsolvable.mean_level +
              kMeanReversion * (level - cfg.unsolvable.mean_level) + noise;
      value = level;
      step.correct = cfg.unsolvable.guess_prob > 0.0 && rng.bernoulli(cfg.unsolvable.guess_prob);
    }
    step.raw_signals[cfg.signal_name] = value;
    traj.steps.push_back(std::move(step));
  }
  return traj;
}

}  // namespace

void validate_config(const SynthConfig& config) {
  if (config.population <= 0) throw std::invalid_argument("population must be positive");
  if (!(config.solvable_fraction >= 0.0 && config.solvable_fraction <= 1.0)) {
    throw std::invalid_argument("solvable_fraction must lie in [0, 1]");
  }
  if (config.steps <= 0) throw std::invalid_argument("steps must be positive");
  if (config.tokens_per_step <= 0) throw std::invalid_argument("tokens_per_step must be positive");
  if (config.budget_tokens <
      static_cast<std::int64_t>(config.steps) * config.tokens_per_step) {
    throw std::invalid_argument("budget_tokens must cover steps * tokens_per_step");
  }
  if (config.solvable.noise_stdev < 0.0 || config.unsolvable.noise_stdev < 0.0) {
    throw std::invalid_argument("noise stdev must be non-negative");
  }
  if (!(config.unsolvable.guess_prob >= 0.0 && config.unsolvable.guess_prob <= 1.0)) {
    throw std::invalid_argument("guess_prob must lie in [0, 1]");
  }
  if (!(config.flicker_prob >= 0.0 && config.flicker_prob < 1.0)) {
    throw std::invalid_argument("flicker_prob must lie in [0, 1)");
  }
  if (config.solvable_fraction > 0.0) {
    const int first_correct = static_cast<int>(std::ceil(config.solvable.drift_midpoint_step));
    if (first_correct < 1 || first_correct > config.steps) {
      throw std::invalid_argument("solvable drift midpoint must fall within the step range");
    }
  }
  if (config.signal_name.empty() || config.signal_name == kTokensSignal) {
    throw std::invalid_argument("signal_name must be a non-reserved channel name");
  }
}

Dataset generate(const SynthConfig& config, int workers) {
  validate_config(config);
  const auto n_solvable = static_cast<std::size_t>(
      std::llround(config.solvable_fraction * config.population));
  Dataset dataset;
  dataset.trajectories.resize(static_cast<std::size_t>(config.population));
  parallel_for(dataset.trajectories.size(), workers, [&](std::size_t i) {
    dataset.trajectories[i] = generate_one(config, i, i < n_solvable);
  });
  dataset.signal_catalog = {config.signal_name};
  return dataset;
}

}  // namespace constop
