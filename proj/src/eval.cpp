// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BayesLSH Authors

#include "bayeslsh/eval.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <fmt/ranges.h>
#include <json.hpp>

#include "bayeslsh/error.hpp"
#include "bayeslsh/util.hpp"

namespace bayeslsh {

CandidateSet ground_truth(const Corpus& corpus, double t, unsigned threads,
                          std::uint64_t guard) {
  const std::uint64_t n = corpus.size();
  const std::uint64_t pairs = n < 2 ? 0 : n * (n - 1) / 2;
  if (pairs > guard) {
    throw GuardError(fmt::format("ground truth needs {} exact comparisons, above the guard of {}",
                                 pairs, guard));
  }
  std::vector<CandidateSet> rows(n);
  parallel_for(n, threads, [&](std::size_t i) {
    if (corpus[i].empty()) return;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!corpus[j].empty() && exact_similarity(corpus, i, j) > t) {
        rows[i].push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
      }
    }
  });
  CandidateSet out;
  for (auto& r : rows) out.insert(out.end(), r.begin(), r.end());
  return out;
}

EvalReport evaluate(const Corpus& corpus, const SearchConfig& config, const SearchResult& result,
                    const CandidateSet& truth) {
  const SearchConfig cfg = config.resolved();
  EvalReport r;
  r.generator = to_string(cfg.generator);
  r.verifier = to_string(cfg.verifier);
  r.measure = to_string(cfg.mode);
  r.threshold = cfg.threshold;
  r.seed = cfg.seed;
  r.truth = truth.size();
  r.candidates = result.candidates;
  r.emitted = result.pairs.size();
  r.survivors = result.stats.survivors;
  r.batch = cfg.batch;
  r.seconds = result.seconds;

  double error_sum = 0.0;
  std::size_t above = 0;
  for (const auto& p : result.pairs) {
    const double exact = exact_similarity(corpus, p.i, p.j);
    const CandidatePair key{p.i, p.j};
    if (std::binary_search(truth.begin(), truth.end(), key)) {
      ++r.true_positives;
    } else {
      ++r.false_positives;
    }
    if (p.low_confidence) ++r.low_confidence;
    const double err = std::abs(p.estimate - exact);
    error_sum += err;
    r.max_error = std::max(r.max_error, err);
    if (err > 0.05) ++above;
    const auto bucket = static_cast<std::size_t>(
        std::upper_bound(kErrorEdges.begin(), kErrorEdges.end(), err) - kErrorEdges.begin());
    ++r.error_histogram[bucket];
  }
  r.false_negatives = r.truth - r.true_positives;
  r.recall = r.truth == 0 ? 1.0 : static_cast<double>(r.true_positives) / r.truth;
  if (r.emitted > 0) {
    r.mean_error = error_sum / r.emitted;
    r.error_above_005 = static_cast<double>(above) / r.emitted;
  }
  return r;
}

void write_eval_tsv(std::ostream& out, const EvalReport& r) {
  out << "# key\tvalue\n";
  fmt::print(out, "generator\t{}\nverifier\t{}\nmeasure\t{}\n", r.generator, r.verifier,
             r.measure);
  fmt::print(out, "threshold\t{}\nseed\t{}\n", r.threshold, r.seed);
  fmt::print(out, "truth\t{}\ncandidates\t{}\nemitted\t{}\n", r.truth, r.candidates, r.emitted);
  fmt::print(out, "true_positives\t{}\nfalse_negatives\t{}\nfalse_positives\t{}\n",
             r.true_positives, r.false_negatives, r.false_positives);
  fmt::print(out, "low_confidence\t{}\nrecall\t{:.6f}\n", r.low_confidence, r.recall);
  fmt::print(out, "error_above_0.05\t{:.6f}\nmean_error\t{:.6f}\nmax_error\t{:.6f}\n",
             r.error_above_005, r.mean_error, r.max_error);
  fmt::print(out, "error_histogram\t{}\n", fmt::join(r.error_histogram, ","));
  fmt::print(out, "batch\t{}\nsurvivors\t{}\n", r.batch, fmt::join(r.survivors, ","));
  fmt::print(out, "seconds_hashing\t{:.6f}\nseconds_generation\t{:.6f}\n", r.seconds.hashing,
             r.seconds.generation);
  fmt::print(out, "seconds_verification\t{:.6f}\nseconds_truth\t{:.6f}\n", r.seconds.verification,
             r.truth_seconds);
}

std::string eval_json(const EvalReport& r) {
  nlohmann::json j;
  j["generator"] = r.generator;
  j["verifier"] = r.verifier;
  j["measure"] = r.measure;
  j["threshold"] = r.threshold;
  j["seed"] = r.seed;
  j["truth"] = r.truth;
  j["candidates"] = r.candidates;
  j["emitted"] = r.emitted;
  j["true_positives"] = r.true_positives;
  j["false_negatives"] = r.false_negatives;
  j["false_positives"] = r.false_positives;
  j["low_confidence"] = r.low_confidence;
  j["recall"] = r.recall;
  j["error_histogram"] = r.error_histogram;
  j["error_histogram_edges"] = kErrorEdges;
  j["error_above_0.05"] = r.error_above_005;
  j["mean_error"] = r.mean_error;
  j["max_error"] = r.max_error;
  j["batch"] = r.batch;
  j["survivors"] = r.survivors;
  j["seconds"] = {{"hashing", r.seconds.hashing},
                  {"generation", r.seconds.generation},
                  {"verification", r.seconds.verification},
                  {"truth", r.truth_seconds}};
  return j.dump();
}

}  // namespace bayeslsh
