// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BayesLSH Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "bayeslsh/corpus.hpp"
#include "bayeslsh/hashing.hpp"

namespace bayeslsh {

struct CandidatePair {
  std::uint32_t i = 0;  // i < j
  std::uint32_t j = 0;

  friend auto operator<=>(const CandidatePair&, const CandidatePair&) = default;
};

// Sorted by (i, j), no duplicates.
using CandidateSet = std::vector<CandidatePair>;

// Number of length-b band signatures so that a pair at collision probability
// `t` is missed with probability at most eps_fn.
std::size_t num_tables(double eps_fn, double t, std::size_t b);

struct BandingParams {
  std::size_t b = 1;  // hashes per band
  std::size_t l = 1;  // tables
  double eps_fn = 0.03;

  std::size_t hashes_required() const noexcept { return b * l; }
};

BandingParams make_banding(double eps_fn, double t_collision, std::size_t b);

// Widest band whose b * l fits in `hash_budget`, for a pair at collision
// probability t_collision. Wider bands admit fewer false positives.
BandingParams auto_banding(double eps_fn, double t_collision, std::size_t hash_budget);

struct GeneratorLimits {
  std::size_t max_candidates = 200'000'000;
  std::uint64_t mix_seed = 0x5eed;
  unsigned threads = 1;
};

// Pairs sharing the full band signature in at least one table. Table j uses
// hashes [j*b, (j+1)*b). Empty vectors are excluded.
CandidateSet lsh_banding_generate(const SignatureStore& store, const BandingParams& params,
                                  const GeneratorLimits& limits = {});

// Prefix-filtered inverted index (cosine modes). Returns a superset of all
// pairs with cosine >= t.
CandidateSet allpairs_generate(const Corpus& c, double t, const GeneratorLimits& limits = {});

inline constexpr std::uint64_t kBruteForcePairGuard = 100'000'000;

// Every unordered pair of non-empty vectors.
CandidateSet bruteforce_generate(const Corpus& c, std::uint64_t guard = kBruteForcePairGuard);

// Binary stream: 8-byte magic, u64 count, then (u32 i, u32 j) records,
// little-endian.
void write_candidates(std::ostream& out, const CandidateSet& pairs);
CandidateSet read_candidates(std::istream& in);
void save_candidates(const std::filesystem::path& path, const CandidateSet& pairs);
CandidateSet load_candidates(const std::filesystem::path& path);

}  // namespace bayeslsh
