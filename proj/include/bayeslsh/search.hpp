// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BayesLSH Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bayeslsh/candidates.hpp"
#include "bayeslsh/corpus.hpp"
#include "bayeslsh/hashing.hpp"
#include "bayeslsh/inference.hpp"

namespace bayeslsh {

enum class Generator { kLsh, kAllPairs, kBruteForce };
enum class Verifier { kBayesLsh, kBayesLshLite, kLshApprox, kExact };

std::string_view to_string(Generator g) noexcept;
std::string_view to_string(Verifier v) noexcept;
Generator parse_generator(std::string_view text);
Verifier parse_verifier(std::string_view text);

struct SearchConfig {
  MeasureMode mode = MeasureMode::kCosineWeighted;
  double threshold = 0.7;
  double epsilon = 0.03;
  double delta = 0.05;
  double gamma = 0.03;
  std::size_t batch = 32;         // k: hashes compared per step
  std::size_t lite_hashes = 0;    // h; 0 selects 128 (cosine) / 64 (jaccard)
  std::size_t max_hashes = 0;     // 0 selects 4096 (cosine) / 512 (jaccard)
  std::size_t fixed_hashes = 0;   // LSH-Approx n; 0 selects 2048 / 360
  std::uint64_t seed = 0;
  Generator generator = Generator::kLsh;
  Verifier verifier = Verifier::kBayesLsh;
  std::size_t band_width = 0;     // 0 picks the widest band fitting max_hashes
  double fn_rate = 0.03;          // banding false-negative rate
  bool fresh_verification_hashes = false;
  bool use_cache = true;
  bool fit_prior = true;          // Jaccard only
  std::size_t prior_samples = 10'000;
  std::size_t max_candidates = 200'000'000;
  unsigned threads = 1;

  Measure measure() const noexcept { return measure_of(mode); }
  // Copy with every 0-means-default field filled in; throws UsageError on
  // inconsistent settings.
  SearchConfig resolved() const;
};

struct OutputPair {
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  double estimate = 0.0;
  bool exact = false;
  bool low_confidence = false;
  std::uint32_t hashes_used = 0;

  friend bool operator==(const OutputPair&, const OutputPair&) = default;
};

// Everything a verifier reads. The store is extended lazily by the caller of
// the per-pair routine; the run routines extend it between batches.
struct VerificationContext {
  const Corpus& corpus;
  SignatureStore& store;
  const MinMatchTable& table;
  const ConcentrationCache& cache;
  const SearchConfig& config;  // resolved
};

struct VerifyOutcome {
  bool pruned = false;
  double estimate = 0.0;
  std::uint32_t hashes_used = 0;
  bool low_confidence = false;
};

struct TraceStep {
  std::uint32_t m = 0;
  std::uint32_t n = 0;
  bool pruned = false;
};

// Sequential BayesLSH on one pair: compare k hashes at a time, prune when
// m < minMatches(n), stop once the MAP estimate is concentrated, and emit a
// low-confidence estimate at the hash cap. Extends the store as needed, so
// it must not run concurrently with other users of the store.
VerifyOutcome bayeslsh_verify_pair(const VerificationContext& ctx, const CandidatePair& pair,
                                   std::vector<TraceStep>* trace = nullptr);

struct RunStats {
  std::size_t candidates = 0;
  // survivors[b]: candidates not pruned after (b + 1) * k hashes.
  std::vector<std::size_t> survivors;
  std::size_t hashes_compared = 0;
  std::size_t low_confidence = 0;
  std::size_t exact_computations = 0;
  std::optional<BetaParams> prior;
};

// Jaccard prior fitted on exact similarities of up to `samples` candidates
// drawn uniformly (seeded).
BetaParams fit_prior(const Corpus& corpus, const CandidateSet& candidates,
                     std::size_t samples, std::uint64_t seed);

// Verifiers. `store` may carry signatures from candidate generation; when it
// is null, or fresh verification hashes are requested, a private store is
// built. Output is sorted by (i, j).
std::vector<OutputPair> bayeslsh_run(const Corpus& corpus, const CandidateSet& candidates,
                                     const SearchConfig& config,
                                     SignatureStore* store = nullptr,
                                     RunStats* stats = nullptr);
std::vector<OutputPair> bayeslsh_lite_run(const Corpus& corpus, const CandidateSet& candidates,
                                          const SearchConfig& config,
                                          SignatureStore* store = nullptr,
                                          RunStats* stats = nullptr);
std::vector<OutputPair> lsh_approx_run(const Corpus& corpus, const CandidateSet& candidates,
                                       const SearchConfig& config,
                                       SignatureStore* store = nullptr,
                                       RunStats* stats = nullptr);
std::vector<OutputPair> exact_run(const Corpus& corpus, const CandidateSet& candidates,
                                  const SearchConfig& config, RunStats* stats = nullptr);

struct PhaseTimes {
  double hashing = 0.0;
  double generation = 0.0;
  double verification = 0.0;
};

struct SearchResult {
  std::vector<OutputPair> pairs;
  std::size_t candidates = 0;
  std::optional<BandingParams> banding;
  RunStats stats;
  PhaseTimes seconds;
};

// Collision probability a banding table must catch: the threshold itself for
// Jaccard, c2r(t) for cosine.
double collision_threshold(Measure measure, double t);

// Candidate generation only (signatures for the lsh generator land in
// `store`, which must then outlive any use of them).
CandidateSet generate_candidates(const Corpus& corpus, const SearchConfig& config,
                                 SignatureStore& store,
                                 std::optional<BandingParams>* banding = nullptr,
                                 PhaseTimes* seconds = nullptr);

// Runs the chosen verifier on a candidate set.
std::vector<OutputPair> verify_candidates(const Corpus& corpus, const CandidateSet& candidates,
                                          const SearchConfig& config, SignatureStore& store,
                                          RunStats* stats = nullptr);

// Full pipeline: generator then verifier.
SearchResult search(const Corpus& corpus, const SearchConfig& config);

// `id_i<TAB>id_j<TAB>estimate<TAB>exact<TAB>low_confidence` rows after a
// `#`-prefixed header. Estimates use a fixed 6-decimal format.
void write_results_tsv(std::ostream& out, const Corpus& corpus,
                       const std::vector<OutputPair>& pairs,
                       const std::vector<std::string>& header_lines = {});

}  // namespace bayeslsh
