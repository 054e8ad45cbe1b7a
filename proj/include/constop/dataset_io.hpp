#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "constop/trajectory.hpp"

namespace constop {

// strict: any malformed record or invariant violation aborts ingestion.
// lenient: offending trajectories are dropped and reported instead.
enum class Strictness { strict, lenient };

struct DropRecord {
  std::size_t line = 0;  // 1-based line number in the source file
  std::string id;        // empty when the record never parsed far enough
  std::string reason;
};

struct IngestResult {
  Dataset dataset;
  std::vector<DropRecord> dropped;
};

// Reads a line-delimited trajectory file. See README for the record schema.
// Unknown top-level keys are ignored; unknown step keys are an error in
// strict mode and ignored in lenient mode.
IngestResult ingest(const std::filesystem::path& path,
                    Strictness strictness = Strictness::strict);
IngestResult ingest_stream(std::istream& in, Strictness strictness,
                           const std::string& source_name = "<stream>");

// Serializes a dataset back to the same format; ingest(emit(d)) == d.
void emit(const Dataset& dataset, const std::filesystem::path& path);
void emit_stream(const Dataset& dataset, std::ostream& out);
std::string emit_record(const Trajectory& trajectory);

struct SplitIndices {
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

// Seeded permutation split of [0, n): first validation_size shuffled
// indices form the validation side. Deterministic per seed.
SplitIndices split_indices(std::size_t n, std::size_t validation_size,
                           std::uint64_t seed);

// Uniform random (validation, test) partition. With stratify_by_solvable the
// validation side preserves the dataset's solvable share (rounded).
std::pair<Dataset, Dataset> split(const Dataset& dataset, std::size_t validation_size,
                                  std::uint64_t seed, bool stratify_by_solvable = false);

// Copy of the selected trajectories, catalog preserved.
Dataset subset(const Dataset& dataset, const std::vector<std::size_t>& indices);

struct RatioPair {
  int solvable = 1;
  int unsolvable = 1;
};

// Subsamples without replacement to `size` trajectories with the requested
// solvable:unsolvable class counts; rounding favors the solvable class.
Dataset subsample_by_ratio(const Dataset& dataset, RatioPair ratio, std::size_t size,
                           std::uint64_t seed);

// FNV-1a over the file bytes, as "fnv1a:<hex>"; used in sweep manifests.
std::string file_digest(const std::filesystem::path& path);

}  // namespace constop
