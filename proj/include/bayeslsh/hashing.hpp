// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BayesLSH Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <variant>
#include <vector>

#include "bayeslsh/corpus.hpp"

namespace bayeslsh {

// ---------------------------------------------------------------------------
// Two-byte storage for standard-normal samples: the range (-8, 8) is cut into
// 2^16 bins of width 1/4096 and values decode to the bin center.

struct EncodedGaussian {
  std::uint16_t code = 0;
  bool clamped = false;  // input was outside (-8, 8)
};

EncodedGaussian encode_gaussian_2byte(double x) noexcept;
double decode_gaussian_2byte(std::uint16_t code) noexcept;

// ---------------------------------------------------------------------------
// Signed random projections. Hash i owns plane i, drawn from its own RNG
// stream seeded by (seed, i), so a plane never depends on how many planes
// exist. Planes are materialized in blocks of 64 hashes.

class CosineHashFamily {
 public:
  static constexpr std::size_t kBlock = 64;

  CosineHashFamily(std::uint64_t seed, std::size_t dim);

  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t capacity() const noexcept { return blocks_.size() * kBlock; }
  // Components that fell outside (-8, 8) and were clamped.
  std::size_t clamped_count() const noexcept { return clamped_; }

  // Materializes planes for hashes [0, count). Not thread-safe.
  void reserve(std::size_t count);

  double component(std::size_t hash, FeatureId feature) const;

  // Writes bits [from, to) of `row` (absolute bit positions); bit i is set iff
  // dot(plane_i, v) >= 0. Requires to <= capacity().
  void project(const SparseVector& v, std::size_t from, std::size_t to,
               std::span<std::uint64_t> row) const;

 private:
  std::uint64_t seed_;
  std::size_t dim_;
  // blocks_[b][f * kBlock + lane] encodes plane (b * kBlock + lane), feature f.
  std::vector<std::vector<std::uint16_t>> blocks_;
  std::size_t clamped_ = 0;
};

// Bits [from, to) of v's signature, one byte (0 or 1) per hash.
std::vector<std::uint8_t> cosine_signature(CosineHashFamily& fam, const SparseVector& v,
                                           std::size_t from, std::size_t to);

// ---------------------------------------------------------------------------
// Minwise hashing approximated by universal hashing over the Mersenne prime
// 2^61 - 1. Element ids are scrambled by a fixed 64-bit mixer before the
// affine map; the affine map alone is visibly non-minwise on runs of
// consecutive ids.

class MinhashFamily {
 public:
  static constexpr std::uint64_t kPrime = (1ULL << 61) - 1;

  struct Params {
    std::uint64_t a = 1;  // in [1, p - 1]
    std::uint64_t b = 0;  // in [0, p - 1]
  };

  explicit MinhashFamily(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t capacity() const noexcept { return params_.size(); }
  void reserve(std::size_t count);
  const Params& params(std::size_t i) const { return params_.at(i); }

  std::uint64_t hash(std::size_t i, FeatureId element) const noexcept;

  // out[i - from] = min over elements of hash i; requires a non-empty set and
  // to <= capacity().
  void signature(const SparseVector& v, std::size_t from, std::size_t to,
                 std::span<std::uint64_t> out) const;

 private:
  std::uint64_t seed_;
  std::vector<Params> params_;
};

std::vector<std::uint64_t> minhash_signature(MinhashFamily& fam, const SparseVector& v,
                                             std::size_t from, std::size_t to);

// ---------------------------------------------------------------------------

struct MatchCount {
  std::uint32_t m = 0;  // matches
  std::uint32_t n = 0;  // hashes compared

  MatchCount& operator+=(const MatchCount& o) noexcept {
    m += o.m;
    n += o.n;
    return *this;
  }
  friend bool operator==(const MatchCount&, const MatchCount&) = default;
};

struct SignatureConfig {
  std::uint64_t seed = 0;
  std::size_t batch = 32;       // hashes-available stays a multiple of this
  std::size_t max_hashes = 0;   // 0 selects the measure default
  unsigned threads = 1;
};

inline constexpr std::size_t kDefaultMaxCosineHashes = 4096;
inline constexpr std::size_t kDefaultMaxJaccardHashes = 512;

std::size_t default_max_hashes(Measure measure) noexcept;

// Per-object signatures, extended on demand. Cosine rows are packed bits,
// Jaccard rows are 64-bit minhash values. The store keeps a reference to the
// corpus, which must outlive it. Extension is the only mutating operation and
// must not run concurrently with reads.
class SignatureStore {
 public:
  SignatureStore(const Corpus& corpus, SignatureConfig config);

  Measure measure() const noexcept { return measure_; }
  const Corpus& corpus() const noexcept { return *corpus_; }
  std::uint64_t seed() const noexcept { return config_.seed; }
  std::size_t batch() const noexcept { return config_.batch; }
  std::size_t max_hashes() const noexcept { return config_.max_hashes; }
  std::size_t hashes_available() const noexcept { return available_; }
  std::size_t size() const noexcept { return corpus_->size(); }

  // Extends every object to at least `target` hashes (rounded up to a
  // multiple of the batch). Previously issued hashes never change.
  void extend(std::size_t target);

  // Matches among hashes [from, to) of objects x and y.
  MatchCount count_matches(std::size_t x, std::size_t y, std::size_t from,
                           std::size_t to) const;

  // Raw hash access (bit value 0/1 for cosine).
  std::uint64_t hash_value(std::size_t object, std::size_t i) const;
  std::span<const std::uint64_t> row(std::size_t object) const;
  std::size_t row_words() const noexcept { return stride_; }

  // Binary dump: magic, measure, count, hashes-available, seed, then rows.
  void write(std::ostream& out) const;
  static SignatureStore read(std::istream& in, const Corpus& corpus, SignatureConfig config);
  void save(const std::filesystem::path& path) const;
  static SignatureStore load(const std::filesystem::path& path, const Corpus& corpus,
                             SignatureConfig config);

 private:
  std::span<std::uint64_t> mutable_row(std::size_t object);

  const Corpus* corpus_;
  Measure measure_;
  SignatureConfig config_;
  std::size_t stride_;  // words per row
  std::size_t available_ = 0;
  std::vector<std::uint64_t> data_;
  std::variant<CosineHashFamily, MinhashFamily> family_;
};

void extend_signatures(SignatureStore& store, std::size_t target);

MatchCount count_matches(const SignatureStore& store, std::size_t x, std::size_t y,
                         std::size_t from, std::size_t to);

}  // namespace bayeslsh
