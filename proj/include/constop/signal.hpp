#pragma once

#include <string>
#include <vector>

namespace constop {

// Direction in which a raw signal expresses confidence. Every consumer
// downstream of orient() assumes larger value = more confident.
enum class Orientation { higher_confident, lower_confident };

// History-dependent smoothing applied after orientation.
struct Transform {
  enum class Kind { identity, ema };
  Kind kind = Kind::identity;
  double alpha = 1.0;  // ema weight, (0, 1]; 1 reduces to identity

  static Transform identity() { return {}; }
  static Transform ema(double alpha);
};

// One uncertainty channel: where to find it, which way it points, and how
// it is smoothed before thresholding.
struct SignalSpec {
  std::string name;
  Orientation orientation = Orientation::higher_confident;
  Transform transform;
};

// Recorded token statistics at one reasoning step: log-probabilities of the
// forced answer tokens and the entropy (nats) of the next-token distribution
// after the forcing prefix.
struct AnswerTokenRecord {
  std::vector<double> answer_logprobs;
  double next_token_entropy = 0.0;
};

// Length-normalized log likelihood of the forced answer (higher_confident).
double confidence_signal(const AnswerTokenRecord& record);

// Next-token entropy after the forcing prefix (lower_confident: low entropy
// means high confidence).
double eat_signal(const AnswerTokenRecord& record);

// Normalizes a series so that larger = more confident: higher_confident
// series pass through, lower_confident series are negated. Negation is
// total and preserves thresholding semantics under any monotone remap.
std::vector<double> orient(std::vector<double> values, const SignalSpec& spec);

// Applies the smoothing transform. ema: z_1 = s_1, z_t = a*s_t + (1-a)*z_{t-1}.
// Causal: each output depends only on the input prefix.
std::vector<double> smooth(std::vector<double> values, const Transform& transform);

std::string orientation_name(Orientation o);
Orientation orientation_from_name(const std::string& name);

}  // namespace constop
