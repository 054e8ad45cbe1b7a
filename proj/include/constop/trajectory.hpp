#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "constop/signal.hpp"

namespace constop {

// One reasoning step of one instance: the cumulative token count when the
// step ended, the recorded uncertainty signals, and whether the answer
// forced at this step matches ground truth.
struct StepRecord {
  int step_index = 0;  // 1-based position t
  std::int64_t cum_tokens = 0;
  std::map<std::string, double> raw_signals;
  bool correct = false;
};

// An instance's full recorded reasoning run plus its token budget.
// Solvability is always derived ("some step is correct"), never stored.
struct Trajectory {
  std::string id;
  std::int64_t budget_tokens = 0;
  std::vector<StepRecord> steps;
  std::map<std::string, std::string> meta;
  // Optional per-step token statistics; empty or one entry per step.
  std::vector<AnswerTokenRecord> token_records;

  int step_count() const { return static_cast<int>(steps.size()); }

  bool solvable() const {
    for (const auto& s : steps) {
      if (s.correct) return true;
    }
    return false;
  }

  // First step with a correct answer, 1-based; 0 if the instance is never
  // correct within its budget.
  int first_correct_step() const {
    for (const auto& s : steps) {
      if (s.correct) return s.step_index;
    }
    return 0;
  }
};

struct Dataset {
  std::vector<Trajectory> trajectories;
  std::vector<std::string> signal_catalog;  // sorted, identical across trajectories

  std::size_t size() const { return trajectories.size(); }
};

// Reserved channel name: the cumulative token count itself used as a
// signal, so a pure token cutoff is expressible as an ordinary policy.
inline const std::string kTokensSignal = "tokens";

// Returns an empty string if the trajectory satisfies every invariant,
// otherwise a human-readable reason.
std::string validate_trajectory(const Trajectory& trajectory);

// Raw (unoriented, unsmoothed) per-step values of a named channel.
// Understands the reserved "tokens" channel; throws on unknown names.
std::vector<double> raw_series(const Trajectory& trajectory, const std::string& signal);

bool dataset_has_signal(const Dataset& dataset, const std::string& signal);

// Sorted signal names of a trajectory's steps (all steps carry the same set).
std::vector<std::string> signal_keys(const Trajectory& trajectory);

}  // namespace constop
