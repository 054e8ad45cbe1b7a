#include "constop/dataset_io.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "constop/rng.hpp"

namespace constop {
namespace {

using nlohmann::json;

const char* const kStepKeys[] = {"t", "tokens", "correct", "signals"};

bool is_known_step_key(const std::string& key) {
  for (const char* k : kStepKeys) {
    if (key == k) return true;
  }
  return false;
}

std::int64_t require_int(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw std::runtime_error(std::string("missing key '") + key + "'");
  if (!it->is_number_integer()) {
    throw std::runtime_error(std::string("key '") + key + "' must be an integer");
  }
  return it->get<std::int64_t>();
}

Trajectory parse_record(const json& j, Strictness strictness) {
  if (!j.is_object()) throw std::runtime_error("record is not an object");
  Trajectory traj;
  const auto id_it = j.find("id");
  if (id_it == j.end() || !id_it->is_string()) {
    throw std::runtime_error("missing string key 'id'");
  }
  traj.id = id_it->get<std::string>();
  traj.budget_tokens = require_int(j, "budget_tokens");

  if (const auto meta_it = j.find("meta"); meta_it != j.end()) {
    if (!meta_it->is_object()) throw std::runtime_error("'meta' must be an object");
    for (const auto& [key, value] : meta_it->items()) {
      if (!value.is_string()) throw std::runtime_error("'meta' values must be strings");
      traj.meta[key] = value.get<std::string>();
    }
  }

  const auto steps_it = j.find("steps");
  if (steps_it == j.end() || !steps_it->is_array()) {
    throw std::runtime_error("missing array key 'steps'");
  }
  traj.steps.reserve(steps_it->size());
  for (const auto& sj : *steps_it) {
    if (!sj.is_object()) throw std::runtime_error("step is not an object");
    if (strictness == Strictness::strict) {
      for (const auto& [key, _] : sj.items()) {
        if (!is_known_step_key(key)) {
          throw std::runtime_error("unknown step key '" + key + "'");
        }
      }
    }
    StepRecord step;
    step.step_index = static_cast<int>(require_int(sj, "t"));
    step.cum_tokens = require_int(sj, "tokens");
    const std::int64_t correct = require_int(sj, "correct");
    if (correct != 0 && correct != 1) {
      throw std::runtime_error("'correct' must be 0 or 1");
    }
    step.correct = correct == 1;
    const auto sig_it = sj.find("signals");
    if (sig_it == sj.end() || !sig_it->is_object()) {
      throw std::runtime_error("missing object key 'signals'");
    }
    for (const auto& [name, value] : sig_it->items()) {
      if (!value.is_number()) {
        throw std::runtime_error("signal '" + name + "' must be a number");
      }
      step.raw_signals[name] = value.get<double>();
    }
    traj.steps.push_back(std::move(step));
  }

  if (const auto tr_it = j.find("token_records"); tr_it != j.end()) {
    if (!tr_it->is_array()) throw std::runtime_error("'token_records' must be an array");
    traj.token_records.reserve(tr_it->size());
    for (const auto& rj : *tr_it) {
      if (!rj.is_object()) throw std::runtime_error("token record is not an object");
      AnswerTokenRecord rec;
      if (const auto lp = rj.find("answer_logprobs"); lp != rj.end()) {
        if (!lp->is_array()) throw std::runtime_error("'answer_logprobs' must be an array");
        for (const auto& v : *lp) rec.answer_logprobs.push_back(v.get<double>());
      }
      if (const auto ent = rj.find("next_token_entropy"); ent != rj.end()) {
        rec.next_token_entropy = ent->get<double>();
      }
      traj.token_records.push_back(std::move(rec));
    }
  }
  return traj;
}

}  // namespace

IngestResult ingest(const std::filesystem::path& path, Strictness strictness) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open trajectory file: " + path.string());
  }
  return ingest_stream(in, strictness, path.string());
}

IngestResult ingest_stream(std::istream& in, Strictness strictness,
                           const std::string& source_name) {
  IngestResult result;
  std::vector<std::string> catalog;  // fixed by the first accepted trajectory
  bool catalog_set = false;
  std::string line;
  std::size_t line_no = 0;

  auto reject = [&](std::size_t line_num, const std::string& id, const std::string& reason) {
    if (strictness == Strictness::strict) {
      throw std::runtime_error(source_name + ":" + std::to_string(line_num) + ": " + reason);
    }
    result.dropped.push_back({line_num, id, reason});
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Trajectory traj;
    try {
      traj = parse_record(json::parse(line), strictness);
    } catch (const std::exception& e) {
      reject(line_no, "", std::string("malformed record: ") + e.what());
      continue;
    }
    if (const std::string reason = validate_trajectory(traj); !reason.empty()) {
      reject(line_no, traj.id, reason);
      continue;
    }
    const bool duplicate =
        std::any_of(result.dataset.trajectories.begin(), result.dataset.trajectories.end(),
                    [&](const Trajectory& t) { return t.id == traj.id; });
    if (duplicate) {
      reject(line_no, traj.id, "duplicate id");
      continue;
    }
    const std::vector<std::string> keys = signal_keys(traj);
    if (!catalog_set) {
      catalog = keys;
      catalog_set = true;
    } else if (keys != catalog) {
      reject(line_no, traj.id, "signal keys differ from dataset catalog");
      continue;
    }
    result.dataset.trajectories.push_back(std::move(traj));
  }
  result.dataset.signal_catalog = std::move(catalog);
  return result;
}

std::string emit_record(const Trajectory& trajectory) {
  json steps = json::array();
  for (const auto& step : trajectory.steps) {
    json signals = json::object();
    for (const auto& [name, value] : step.raw_signals) signals[name] = value;
    steps.push_back({{"t", step.step_index},
                     {"tokens", step.cum_tokens},
                     {"correct", step.correct ? 1 : 0},
                     {"signals", std::move(signals)}});
  }
  json record = {{"id", trajectory.id},
                 {"budget_tokens", trajectory.budget_tokens},
                 {"meta", json::object()},
                 {"steps", std::move(steps)}};
  for (const auto& [key, value] : trajectory.meta) record["meta"][key] = value;
  if (!trajectory.token_records.empty()) {
    json records = json::array();
    for (const auto& rec : trajectory.token_records) {
      records.push_back({{"answer_logprobs", rec.answer_logprobs},
                         {"next_token_entropy", rec.next_token_entropy}});
    }
    record["token_records"] = std::move(records);
  }
  return record.dump();
}

void emit_stream(const Dataset& dataset, std::ostream& out) {
  for (const auto& traj : dataset.trajectories) {
    out << emit_record(traj) << '\n';
  }
}

void emit(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path.string());
  emit_stream(dataset, out);
}

SplitIndices split_indices(std::size_t n, std::size_t validation_size, std::uint64_t seed) {
  if (validation_size >= n) {
    throw std::invalid_argument("validation_size must be smaller than the dataset");
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(perm);
  SplitIndices out;
  out.validation.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(validation_size));
  out.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(validation_size), perm.end());
  return out;
}

namespace {

SplitIndices split_indices_stratified(const Dataset& dataset, std::size_t validation_size,
                                      std::uint64_t seed) {
  std::vector<std::size_t> solvable;
  std::vector<std::size_t> unsolvable;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    (dataset.trajectories[i].solvable() ? solvable : unsolvable).push_back(i);
  }
  Rng rng(seed);
  rng.shuffle(solvable);
  rng.shuffle(unsolvable);
  // Preserve the solvable share in the validation side, rounding to nearest.
  std::size_t val_solvable = static_cast<std::size_t>(
      std::llround(static_cast<double>(validation_size) *
                   static_cast<double>(solvable.size()) / static_cast<double>(dataset.size())));
  val_solvable = std::min(val_solvable, solvable.size());
  std::size_t val_unsolvable = validation_size - val_solvable;
  if (val_unsolvable > unsolvable.size()) {
    val_unsolvable = unsolvable.size();
    val_solvable = validation_size - val_unsolvable;
  }
  SplitIndices out;
  for (std::size_t i = 0; i < solvable.size(); ++i) {
    (i < val_solvable ? out.validation : out.test).push_back(solvable[i]);
  }
  for (std::size_t i = 0; i < unsolvable.size(); ++i) {
    (i < val_unsolvable ? out.validation : out.test).push_back(unsolvable[i]);
  }
  return out;
}

}  // namespace

Dataset subset(const Dataset& dataset, const std::vector<std::size_t>& indices) {
  Dataset out;
  out.signal_catalog = dataset.signal_catalog;
  out.trajectories.reserve(indices.size());
  for (std::size_t i : indices) out.trajectories.push_back(dataset.trajectories[i]);
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, std::size_t validation_size,
                                  std::uint64_t seed, bool stratify_by_solvable) {
  const SplitIndices idx = stratify_by_solvable
                               ? split_indices_stratified(dataset, validation_size, seed)
                               : split_indices(dataset.size(), validation_size, seed);
  return {subset(dataset, idx.validation), subset(dataset, idx.test)};
}

Dataset subsample_by_ratio(const Dataset& dataset, RatioPair ratio, std::size_t size,
                           std::uint64_t seed) {
  if (ratio.solvable <= 0 || ratio.unsolvable <= 0) {
    throw std::invalid_argument("ratio components must be positive");
  }
  const std::size_t total_parts = static_cast<std::size_t>(ratio.solvable + ratio.unsolvable);
  // Remainder goes to the solvable class.
  const std::size_t want_unsolvable =
      size * static_cast<std::size_t>(ratio.unsolvable) / total_parts;
  const std::size_t want_solvable = size - want_unsolvable;

  std::vector<std::size_t> solvable;
  std::vector<std::size_t> unsolvable;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    (dataset.trajectories[i].solvable() ? solvable : unsolvable).push_back(i);
  }
  if (solvable.size() < want_solvable) {
    throw std::runtime_error("subsample_by_ratio: need " + std::to_string(want_solvable) +
                             " solvable trajectories, have " + std::to_string(solvable.size()));
  }
  if (unsolvable.size() < want_unsolvable) {
    throw std::runtime_error("subsample_by_ratio: need " + std::to_string(want_unsolvable) +
                             " unsolvable trajectories, have " +
                             std::to_string(unsolvable.size()));
  }
  Rng rng(seed);
  rng.shuffle(solvable);
  rng.shuffle(unsolvable);
  std::vector<std::size_t> chosen(solvable.begin(),
                                  solvable.begin() + static_cast<std::ptrdiff_t>(want_solvable));
  chosen.insert(chosen.end(), unsolvable.begin(),
                unsolvable.begin() + static_cast<std::ptrdiff_t>(want_unsolvable));
  std::sort(chosen.begin(), chosen.end());  // keep source order
  return subset(dataset, chosen);
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file for digest: " + path.string());
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  char buffer[1 << 16];
  while (in) {
    in.read(buffer, sizeof(buffer));
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      hash ^= static_cast<unsigned char>(buffer[i]);
      hash *= 0x100000001B3ULL;
    }
  }
  std::ostringstream out;
  out << "fnv1a:" << std::hex << hash;
  return out.str();
}

}  // namespace constop
