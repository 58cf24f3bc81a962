// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BayesLSH Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace bayeslsh {

using FeatureId = std::uint32_t;

struct Entry {
  FeatureId feature = 0;
  double weight = 0.0;

  friend bool operator==(const Entry&, const Entry&) = default;
};

// A sparse object: entries strictly ascending by feature, weights positive.
// The struct itself does not enforce this; corpus construction validates it.
struct SparseVector {
  std::string id;
  std::vector<Entry> entries;

  bool empty() const noexcept { return entries.empty(); }
  std::size_t size() const noexcept { return entries.size(); }
  double squared_norm() const noexcept;

  friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

enum class Measure { kCosine, kJaccard };

enum class MeasureMode { kCosineWeighted, kCosineBinary, kJaccard };

Measure measure_of(MeasureMode mode) noexcept;
bool is_binary(MeasureMode mode) noexcept;
std::string_view to_string(MeasureMode mode) noexcept;
std::string_view to_string(Measure measure) noexcept;
MeasureMode parse_measure_mode(std::string_view text);

// Threshold in the open interval (0, 1).
class SimilarityThreshold {
 public:
  explicit SimilarityThreshold(double t);
  double value() const noexcept { return t_; }
  operator double() const noexcept { return t_; }

 private:
  double t_;
};

// Immutable after construction. Vector ids are unique; in binary modes the raw
// weights are 1 (cosine-binary stores them L2-normalized, i.e. 1/sqrt(|x|)).
class Corpus {
 public:
  Corpus() = default;
  // Validates every vector and normalizes in cosine modes.
  Corpus(std::vector<SparseVector> vectors, MeasureMode mode);

  const std::vector<SparseVector>& vectors() const noexcept { return vectors_; }
  const SparseVector& operator[](std::size_t i) const { return vectors_[i]; }
  std::size_t size() const noexcept { return vectors_.size(); }
  bool empty() const noexcept { return vectors_.empty(); }
  MeasureMode mode() const noexcept { return mode_; }
  Measure measure() const noexcept { return measure_of(mode_); }
  // Max feature id + 1; 0 for a corpus without entries.
  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t num_empty() const noexcept;

  friend bool operator==(const Corpus&, const Corpus&) = default;

 private:
  std::vector<SparseVector> vectors_;
  MeasureMode mode_ = MeasureMode::kCosineWeighted;
  std::size_t dimension_ = 0;
};

enum class Weighting { kNone, kTfIdf };

// Format: one object per line, `id<TAB>f:w f:w ...` (weighted) or
// `id<TAB>f f ...` (binary modes). Blank lines and `#` lines are skipped.
Corpus load_corpus(const std::filesystem::path& path, MeasureMode mode,
                   Weighting weighting = Weighting::kNone);
Corpus parse_corpus(std::istream& in, MeasureMode mode,
                    Weighting weighting = Weighting::kNone);
void write_corpus(std::ostream& out, const Corpus& corpus);
void save_corpus(const std::filesystem::path& path, const Corpus& corpus);

// weight <- tf * ln(N / df); features present in every vector are dropped.
// Operates on raw term counts and returns unnormalized weights.
std::vector<SparseVector> tfidf_weight(std::vector<SparseVector> raw);
// Corpus-level form; cosine-weighted mode only. Per-vector scaling cancels
// under the re-normalization, so a normalized input gives the same result as
// its raw counts.
Corpus tfidf_weight(const Corpus& c);

// Dot product of two L2-normalized vectors clamped to [0, 1]. Empty vectors
// have similarity 0 with everything.
double cosine_exact(const SparseVector& x, const SparseVector& y);
// |x ∩ y| / |x ∪ y| for unit-weight vectors; 0 for two empty sets.
double jaccard_exact(const SparseVector& x, const SparseVector& y);

// Unchecked kernels used in hot loops; inputs are assumed valid.
double sparse_dot(const SparseVector& x, const SparseVector& y) noexcept;
std::size_t intersection_size(const SparseVector& x, const SparseVector& y) noexcept;

// Exact similarity under the corpus measure, without per-call validation.
double exact_similarity(const Corpus& corpus, std::size_t i, std::size_t j);

struct PlantedGroup {
  std::size_t pairs = 0;
  double similarity = 0.0;
};

struct SyntheticSpec {
  std::size_t n = 0;
  std::size_t dim = 5000;
  std::vector<PlantedGroup> planted;
  std::uint64_t seed = 0;
  MeasureMode mode = MeasureMode::kCosineWeighted;
  // Features per background / planted object.
  std::size_t features_per_vector = 40;
};

// Deterministic synthetic corpus. Planted pairs land within 0.02 of their
// target similarity; the rest are drawn with low mutual similarity. Object
// order is shuffled so planted partners are not adjacent.
Corpus generate_synthetic(const SyntheticSpec& spec);

}  // namespace bayeslsh
