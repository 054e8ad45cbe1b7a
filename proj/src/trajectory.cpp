#include "constop/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace constop {

std::string validate_trajectory(const Trajectory& trajectory) {
  if (trajectory.id.empty()) return "empty id";
  if (trajectory.budget_tokens <= 0) return "budget_tokens must be positive";
  if (trajectory.steps.empty()) return "steps is empty";

  const auto& first_keys = trajectory.steps.front().raw_signals;
  std::int64_t prev_tokens = -1;
  for (std::size_t i = 0; i < trajectory.steps.size(); ++i) {
    const StepRecord& step = trajectory.steps[i];
    if (step.step_index != static_cast<int>(i) + 1) {
      return "step_index values must be 1..T consecutive";
    }
    if (step.cum_tokens < 0) return "cum_tokens must be non-negative";
    if (step.cum_tokens < prev_tokens) return "cum_tokens must be non-decreasing";
    prev_tokens = step.cum_tokens;
    if (step.raw_signals.size() != first_keys.size() ||
        !std::equal(step.raw_signals.begin(), step.raw_signals.end(),
                    first_keys.begin(),
                    [](const auto& a, const auto& b) { return a.first == b.first; })) {
      return "signal keys differ across steps";
    }
    for (const auto& [name, value] : step.raw_signals) {
      if (!std::isfinite(value)) return "non-finite signal value for '" + name + "'";
    }
  }
  if (trajectory.steps.back().cum_tokens > trajectory.budget_tokens) {
    return "last cum_tokens exceeds budget_tokens";
  }
  if (!trajectory.token_records.empty()) {
    if (trajectory.token_records.size() != trajectory.steps.size()) {
      return "token_records length differs from steps length";
    }
    for (const auto& rec : trajectory.token_records) {
      for (double lp : rec.answer_logprobs) {
        if (!(lp <= 0.0)) return "answer_logprobs entries must be <= 0";
      }
      if (!(rec.next_token_entropy >= 0.0)) return "next_token_entropy must be >= 0";
    }
  }
  return {};
}

std::vector<double> raw_series(const Trajectory& trajectory, const std::string& signal) {
  std::vector<double> out;
  out.reserve(trajectory.steps.size());
  if (signal == kTokensSignal) {
    for (const auto& step : trajectory.steps) {
      out.push_back(static_cast<double>(step.cum_tokens));
    }
    return out;
  }
  for (const auto& step : trajectory.steps) {
    const auto it = step.raw_signals.find(signal);
    if (it == step.raw_signals.end()) {
      throw std::invalid_argument("unknown signal '" + signal + "' in trajectory " +
                                  trajectory.id);
    }
    out.push_back(it->second);
  }
  return out;
}

bool dataset_has_signal(const Dataset& dataset, const std::string& signal) {
  if (signal == kTokensSignal) return true;
  return std::binary_search(dataset.signal_catalog.begin(),
                            dataset.signal_catalog.end(), signal);
}

std::vector<std::string> signal_keys(const Trajectory& trajectory) {
  std::vector<std::string> keys;
  if (trajectory.steps.empty()) return keys;
  keys.reserve(trajectory.steps.front().raw_signals.size());
  for (const auto& [name, _] : trajectory.steps.front().raw_signals) {
    keys.push_back(name);
  }
  return keys;  // map iteration is already sorted
}

}  // namespace constop
