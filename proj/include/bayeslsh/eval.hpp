// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BayesLSH Authors

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bayeslsh/candidates.hpp"
#include "bayeslsh/corpus.hpp"
#include "bayeslsh/search.hpp"

namespace bayeslsh {

inline constexpr std::uint64_t kEvalPairGuard = 50'000'000;

// All pairs with exact similarity > t, by brute force. Throws GuardError when
// the corpus has more than `guard` pairs.
CandidateSet ground_truth(const Corpus& corpus, double t, unsigned threads = 1,
                          std::uint64_t guard = kEvalPairGuard);

// |estimate - exact| buckets: [0, .01), [.01, .02), [.02, .05), [.05, .1), [.1, inf).
inline constexpr std::array<double, 4> kErrorEdges = {0.01, 0.02, 0.05, 0.1};

struct EvalReport {
  std::string generator;
  std::string verifier;
  std::string measure;
  double threshold = 0.0;
  std::uint64_t seed = 0;
  std::size_t truth = 0;
  std::size_t candidates = 0;
  std::size_t emitted = 0;
  std::size_t true_positives = 0;
  std::size_t false_negatives = 0;
  std::size_t false_positives = 0;  // emitted with exact similarity <= t
  std::size_t low_confidence = 0;
  double recall = 1.0;               // 1 when there is nothing to find
  std::array<std::size_t, kErrorEdges.size() + 1> error_histogram{};
  double error_above_005 = 0.0;      // fraction of emitted pairs
  double mean_error = 0.0;
  double max_error = 0.0;
  std::vector<std::size_t> survivors;
  std::size_t batch = 0;
  PhaseTimes seconds;
  double truth_seconds = 0.0;
};

// Scores emitted pairs against the truth set.
EvalReport evaluate(const Corpus& corpus, const SearchConfig& config, const SearchResult& result,
                    const CandidateSet& truth);

// `# key<TAB>value` header then one row per metric.
void write_eval_tsv(std::ostream& out, const EvalReport& report);
// Single-line JSON record.
std::string eval_json(const EvalReport& report);

}  // namespace bayeslsh
