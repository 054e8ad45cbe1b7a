#include "constop/signal.hpp"

#include <numeric>
#include <stdexcept>

namespace constop {

Transform Transform::ema(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("ema alpha must lie in (0, 1]");
  }
  Transform t;
  t.kind = Kind::ema;
  t.alpha = alpha;
  return t;
}

double confidence_signal(const AnswerTokenRecord& record) {
  if (record.answer_logprobs.empty()) {
    throw std::invalid_argument("confidence_signal: empty answer_logprobs");
  }
  const double sum = std::accumulate(record.answer_logprobs.begin(),
                                     record.answer_logprobs.end(), 0.0);
  return sum / static_cast<double>(record.answer_logprobs.size());
}

double eat_signal(const AnswerTokenRecord& record) {
  if (record.next_token_entropy < 0.0) {
    throw std::invalid_argument("eat_signal: negative entropy");
  }
  return record.next_token_entropy;
}

std::vector<double> orient(std::vector<double> values, const SignalSpec& spec) {
  if (spec.orientation == Orientation::lower_confident) {
    for (double& v : values) v = -v;
  }
  return values;
}

std::vector<double> smooth(std::vector<double> values, const Transform& transform) {
  if (transform.kind == Transform::Kind::identity) return values;
  if (!(transform.alpha > 0.0 && transform.alpha <= 1.0)) {
    throw std::invalid_argument("ema alpha must lie in (0, 1]");
  }
  if (values.empty()) return values;
  const double alpha = transform.alpha;
  double acc = values[0];
  for (std::size_t i = 1; i < values.size(); ++i) {
    acc = alpha * values[i] + (1.0 - alpha) * acc;
    values[i] = acc;
  }
  return values;
}

std::string orientation_name(Orientation o) {
  return o == Orientation::higher_confident ? "higher_confident" : "lower_confident";
}

Orientation orientation_from_name(const std::string& name) {
  if (name == "higher_confident" || name == "higher") return Orientation::higher_confident;
  if (name == "lower_confident" || name == "lower") return Orientation::lower_confident;
  throw std::invalid_argument("unknown orientation: " + name);
}

}  // namespace constop
