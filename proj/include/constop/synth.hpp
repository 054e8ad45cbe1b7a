#pragma once

#include <cstdint>
#include <string>

#include "constop/trajectory.hpp"

namespace constop {

// Solvable regime: the signal drifts from low to high along a logistic
// curve; correctness flips on where the noiseless drift reaches 0.5 and
// stays on (flicker_prob in SynthConfig can re-break later steps).
struct SolvableDynamics {
  double drift_midpoint_step = 0.0;  // step at which the noiseless drift is 0.5
  double steepness = 0.5;            // logistic slope per step
  double noise_stdev = 0.0;
};

// Unsolvable regime: the signal reverts around a fixed level and never
// drifts up; correctness is an independent per-step guess.
struct UnsolvableDynamics {
  double mean_level = 0.0;
  double noise_stdev = 0.0;
  double guess_prob = 0.0;
};

struct SynthConfig {
  int population = 0;
  double solvable_fraction = 0.0;
  int steps = 0;                  // T, per trajectory
  int tokens_per_step = 0;
  std::int64_t budget_tokens = 0; // >= steps * tokens_per_step
  SolvableDynamics solvable;
  UnsolvableDynamics unsolvable;
  std::uint64_t seed = 0;
  // Extension knobs; defaults keep solvable correctness monotone.
  double flicker_prob = 0.0;      // chance a post-convergence step reads wrong
  std::string signal_name = "conf";
};

void validate_config(const SynthConfig& config);

// Deterministic per seed and independent of worker count: every trajectory
// draws from its own derived stream. Class assignment is by count
// (round(population * solvable_fraction) solvable), not coin flips.
Dataset generate(const SynthConfig& config, int workers = 1);

}  // namespace constop
