// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BayesLSH Authors

#include <cmath>
#include <numbers>
#include <sstream>

#include <fmt/format.h>
#include <gtest/gtest.h>

#include "bayeslsh/error.hpp"
#include "bayeslsh/eval.hpp"
#include "bayeslsh/search.hpp"
#include "bayeslsh/util.hpp"

namespace bayeslsh {
namespace {

Corpus two_vectors(double cosine) {
  const double theta = std::acos(cosine);
  std::vector<SparseVector> v = {{"x", {{0, 1.0}}}, {"y", {{0, std::cos(theta)}}}};
  if (std::sin(theta) > 0.0) v[1].entries.push_back({1, std::sin(theta)});
  return Corpus(v, MeasureMode::kCosineWeighted);
}

struct Machinery {
  SearchConfig cfg;
  PosteriorModel post;
  MinMatchTable table;
  ConcentrationCache cache;

  explicit Machinery(SearchConfig c)
      : cfg(c.resolved()),
        post(cfg.measure() == Measure::kCosine ? PosteriorModel::cosine()
                                               : PosteriorModel::jaccard()),
        table(MinMatchTable::build(post, cfg.threshold, cfg.epsilon, cfg.batch, cfg.max_hashes)),
        cache(post, {cfg.delta, cfg.gamma}) {}
};

TEST(VerifyPair, IdenticalVectorsConcentrateNearOne) {
  const Corpus c = two_vectors(1.0);
  SearchConfig base;
  base.threshold = 0.9;
  Machinery mach(base);
  SignatureStore store(c, {.seed = 3, .batch = 32});
  const VerificationContext ctx{c, store, mach.table, mach.cache, mach.cfg};
  const auto out = bayeslsh_verify_pair(ctx, {0, 1});
  EXPECT_FALSE(out.pruned);
  EXPECT_GE(out.estimate, 1.0 - mach.cfg.delta);
  EXPECT_FALSE(out.low_confidence);
}

TEST(VerifyPair, DissimilarPairPrunedQuickly) {
  const Corpus c = two_vectors(0.1);
  SearchConfig base;
  base.threshold = 0.7;
  Machinery mach(base);
  int quick = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SignatureStore store(c, {.seed = seed, .batch = 32});
    const VerificationContext ctx{c, store, mach.table, mach.cache, mach.cfg};
    const auto out = bayeslsh_verify_pair(ctx, {0, 1});
    if (out.pruned && out.hashes_used <= 128) ++quick;
  }
  EXPECT_GE(quick, 99);
}

TEST(VerifyPair, TablePruningEqualsDirectEvaluation) {
  for (double sim : {0.5, 0.65, 0.72, 0.8}) {
    const Corpus c = two_vectors(sim);
    SearchConfig base;
    base.threshold = 0.7;
    Machinery mach(base);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      SignatureStore store(c, {.seed = seed, .batch = 32});
      const VerificationContext ctx{c, store, mach.table, mach.cache, mach.cfg};
      std::vector<TraceStep> trace;
      bayeslsh_verify_pair(ctx, {0, 1}, &trace);
      ASSERT_FALSE(trace.empty());
      for (const auto& s : trace) {
        const bool direct = mach.post.prune_probability(s.m, s.n, 0.7) < mach.cfg.epsilon;
        EXPECT_EQ(s.pruned, direct) << s.m << "/" << s.n;
      }
    }
  }
}

Corpus planted(std::size_t n, std::vector<PlantedGroup> groups, std::uint64_t seed,
               MeasureMode mode = MeasureMode::kCosineWeighted) {
  SyntheticSpec spec;
  spec.n = n;
  spec.planted = std::move(groups);
  spec.seed = seed;
  spec.mode = mode;
  return generate_synthetic(spec);
}

TEST(BayesLshRun, EqualsSequentialPerPairVerification) {
  const Corpus c = planted(300, {{20, 0.6}, {20, 0.75}, {20, 0.9}}, 4);
  SearchConfig cfg;
  cfg.threshold = 0.7;
  cfg.seed = 11;
  cfg.threads = 3;
  const CandidateSet cand = bruteforce_generate(c);
  const auto run = bayeslsh_run(c, cand, cfg);

  Machinery mach(cfg);
  SignatureStore store(c, {.seed = 11, .batch = 32});
  const VerificationContext ctx{c, store, mach.table, mach.cache, mach.cfg};
  std::vector<OutputPair> seq;
  for (const auto& p : cand) {
    const auto o = bayeslsh_verify_pair(ctx, p);
    if (!o.pruned) seq.push_back({p.i, p.j, o.estimate, false, o.low_confidence, o.hashes_used});
  }
  EXPECT_EQ(run, seq);
}

TEST(BayesLshRun, OutputContract) {
  const Corpus c = planted(400, {{25, 0.75}, {25, 0.95}}, 5);
  SearchConfig cfg;
  cfg.threshold = 0.7;
  cfg.seed = 2;
  const CandidateSet cand = bruteforce_generate(c);
  RunStats stats;
  const auto out = bayeslsh_run(c, cand, cfg, nullptr, &stats);
  EXPECT_GE(out.size(), 45U);
  for (std::size_t k = 0; k < out.size(); ++k) {
    const auto& p = out[k];
    EXPECT_TRUE(std::binary_search(cand.begin(), cand.end(), CandidatePair{p.i, p.j}));
    EXPECT_FALSE(p.exact);
    EXPECT_GE(p.estimate, 0.0);
    EXPECT_LE(p.estimate, 1.0);
    if (k > 0) EXPECT_LT(std::tie(out[k - 1].i, out[k - 1].j), std::tie(p.i, p.j));
  }
  EXPECT_EQ(stats.candidates, cand.size());
  EXPECT_EQ(stats.survivors.size(), 4096U / 32);
  EXPECT_TRUE(std::is_sorted(stats.survivors.rbegin(), stats.survivors.rend()));
  EXPECT_EQ(stats.survivors.back(), out.size());
}

TEST(BayesLshRun, DeterministicAcrossThreadsAndCache) {
  const Corpus c = planted(500, {{30, 0.72}, {30, 0.9}}, 6);
  SearchConfig cfg;
  cfg.threshold = 0.7;
  cfg.seed = 8;
  const CandidateSet cand = bruteforce_generate(c);
  cfg.threads = 1;
  const auto a = bayeslsh_run(c, cand, cfg);
  cfg.threads = 7;
  const auto b = bayeslsh_run(c, cand, cfg);
  cfg.use_cache = false;
  const auto d = bayeslsh_run(c, cand, cfg);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, d);
}

TEST(BayesLshRun, RaisingEpsilonNeverUsesMoreHashes) {
  const Corpus c = planted(200, {{15, 0.65}, {15, 0.72}, {15, 0.8}}, 7);
  SearchConfig lo;
  lo.threshold = 0.7;
  lo.epsilon = 0.01;
  SearchConfig hi = lo;
  hi.epsilon = 0.09;
  Machinery ml(lo);
  Machinery mh(hi);
  SignatureStore store(c, {.seed = 13, .batch = 32});
  const VerificationContext cl{c, store, ml.table, ml.cache, ml.cfg};
  const VerificationContext ch{c, store, mh.table, mh.cache, mh.cfg};
  for (const auto& p : bruteforce_generate(c)) {
    const auto a = bayeslsh_verify_pair(cl, p);
    const auto b = bayeslsh_verify_pair(ch, p);
    EXPECT_LE(b.hashes_used, a.hashes_used) << p.i << "," << p.j;
    if (a.pruned) EXPECT_TRUE(b.pruned);
  }
}

TEST(BayesLshRun, CapEmitsLowConfidence) {
  const Corpus c = planted(60, {{10, 0.8}}, 9);
  SearchConfig cfg;
  cfg.threshold = 0.5;
  cfg.delta = 0.002;
  cfg.max_hashes = 256;
  cfg.seed = 1;
  RunStats stats;
  const auto out = bayeslsh_run(c, bruteforce_generate(c), cfg, nullptr, &stats);
  ASSERT_GE(out.size(), 8U);
  for (const auto& p : out) {
    EXPECT_TRUE(p.low_confidence);
    EXPECT_EQ(p.hashes_used, 256U);
  }
  EXPECT_EQ(stats.low_confidence, out.size());
}

TEST(BayesLshRun, EmptyVectorPairsArePruned) {
  std::vector<SparseVector> v = {{"a", {{1, 1}, {2, 1}}}, {"b", {{1, 1}, {2, 1}}}, {"e", {}}};
  const Corpus c(v, MeasureMode::kJaccard);
  SearchConfig cfg;
  cfg.mode = MeasureMode::kJaccard;
  cfg.threshold = 0.5;
  const CandidateSet cand = {{0, 1}, {0, 2}, {1, 2}};
  for (auto run : {&bayeslsh_run, &bayeslsh_lite_run, &lsh_approx_run}) {
    const auto out = run(c, cand, cfg, nullptr, nullptr);
    ASSERT_EQ(out.size(), 1U);
    EXPECT_EQ(out[0].i, 0U);
    EXPECT_EQ(out[0].j, 1U);
  }
}

TEST(BayesLshRun, RejectsMalformedCandidates) {
  const Corpus c = planted(10, {}, 1);
  SearchConfig cfg;
  EXPECT_THROW(bayeslsh_run(c, {{3, 3}}, cfg), ContractViolation);
  EXPECT_THROW(bayeslsh_run(c, {{3, 30}}, cfg), ContractViolation);
}

TEST(BayesLshRun, FreshVerificationHashes) {
  const Corpus c = planted(400, {{40, 0.8}, {40, 0.9}}, 10);
  SearchConfig cfg;
  cfg.threshold = 0.7;
  cfg.seed = 5;
  SignatureStore shared(c, {.seed = 5, .batch = 32});
  const CandidateSet cand = generate_candidates(c, cfg, shared);
  const auto reuse = bayeslsh_run(c, cand, cfg, &shared);
  cfg.fresh_verification_hashes = true;
  const auto fresh = bayeslsh_run(c, cand, cfg, &shared);
  const auto fresh2 = bayeslsh_run(c, cand, cfg, nullptr);
  EXPECT_EQ(fresh, fresh2);
  EXPECT_NE(reuse, fresh);
  const auto truth = ground_truth(c, 0.7);
  for (const auto* out : {&reuse, &fresh}) {
    std::size_t found = 0;
    for (const auto& p : *out) {
      found += std::binary_search(truth.begin(), truth.end(), CandidatePair{p.i, p.j}) ? 1 : 0;
    }
    EXPECT_GE(found, truth.size() * 0.9);
  }
}

TEST(BayesLshRun, JaccardFitsPrior) {
  const Corpus c = planted(400, {{40, 0.6}, {40, 0.85}}, 11, MeasureMode::kJaccard);
  SearchConfig cfg;
  cfg.mode = MeasureMode::kJaccard;
  cfg.threshold = 0.5;
  cfg.seed = 3;
  SignatureStore store(c, {.seed = 3, .batch = 32});
  const CandidateSet cand = generate_candidates(c, cfg, store);
  RunStats stats;
  const auto out = bayeslsh_run(c, cand, cfg, &store, &stats);
  ASSERT_TRUE(stats.prior.has_value());
  EXPECT_NE(*stats.prior, (BetaParams{1, 1}));
  EXPECT_GE(out.size(), 70U);
  cfg.fit_prior = false;
  bayeslsh_run(c, cand, cfg, &store, &stats);
  EXPECT_EQ(*stats.prior, (BetaParams{1, 1}));
}

TEST(FitPrior, SeededAndSampleLimited) {
  const Corpus c = planted(200, {{20, 0.7}}, 12, MeasureMode::kJaccard);
  const CandidateSet cand = bruteforce_generate(c);
  EXPECT_EQ(fit_prior(c, cand, 500, 1), fit_prior(c, cand, 500, 1));
  EXPECT_NE(fit_prior(c, cand, 500, 1), fit_prior(c, cand, 500, 2));
  std::vector<double> all;
  for (const auto& p : cand) all.push_back(exact_similarity(c, p.i, p.j));
  EXPECT_EQ(fit_prior(c, cand, cand.size(), 1), fit_beta_mom(all));
}

TEST(Lite, OutputIsSubsetOfExactVerification) {
  const Corpus c = planted(300, {{20, 0.75}, {20, 0.65}}, 13);
  SearchConfig cfg;
  cfg.threshold = 0.7;
  cfg.seed = 1;
  const CandidateSet cand = bruteforce_generate(c);
  const auto exact = exact_run(c, cand, cfg);
  for (std::size_t h : {32, 128, 512}) {
    cfg.lite_hashes = h;
    for (const auto& p : bayeslsh_lite_run(c, cand, cfg)) {
      auto same = [&](const OutputPair& e) {
        return e.i == p.i && e.j == p.j && e.estimate == p.estimate && e.exact;
      };
      EXPECT_TRUE(std::any_of(exact.begin(), exact.end(), same));
    }
  }
}

TEST(Lite, EmitsOnlyExactAboveThresholdWithGoodRecall) {
  const Corpus c = planted(600, {{40, 0.75}, {40, 0.95}, {40, 0.55}}, 14);
  SearchConfig cfg;
  cfg.threshold = 0.7;
  cfg.seed = 4;
  const CandidateSet cand = bruteforce_generate(c);
  RunStats stats;
  const auto out = bayeslsh_lite_run(c, cand, cfg, nullptr, &stats);
  for (const auto& p : out) {
    EXPECT_TRUE(p.exact);
    EXPECT_GT(exact_similarity(c, p.i, p.j), 0.7);
    EXPECT_EQ(p.estimate, exact_similarity(c, p.i, p.j));
  }
  const auto truth = ground_truth(c, 0.7);
  EXPECT_GE(out.size(), 0.95 * truth.size());
  EXPECT_LT(stats.exact_computations, cand.size() / 10);
  EXPECT_EQ(stats.survivors.size(), 128U / 32);
}

TEST(LshApprox, FixedHashMlEstimates) {
  const Corpus c = planted(200, {{20, 0.8}, {20, 0.6}}, 15);
  SearchConfig cfg;
  cfg.threshold = 0.7;
  cfg.seed = 6;
  const CandidateSet cand = bruteforce_generate(c);
  const auto out = lsh_approx_run(c, cand, cfg);
  SignatureStore store(c, {.seed = 6, .batch = 32});
  store.extend(2048);
  std::size_t expected = 0;
  for (const auto& p : cand) {
    const auto mc = store.count_matches(p.i, p.j, 0, 2048);
    const double est = ml_estimate(mc.m, mc.n, Measure::kCosine);
    if (est >= 0.7) ++expected;
  }
  EXPECT_EQ(out.size(), expected);
  for (const auto& p : out) {
    const auto mc = store.count_matches(p.i, p.j, 0, 2048);
    EXPECT_EQ(p.estimate, ml_estimate(mc.m, mc.n, Measure::kCosine));
    EXPECT_EQ(p.hashes_used, 2048U);
  }
}

TEST(Exact, EmitsExactlyPairsAboveThreshold) {
  const Corpus c = planted(200, {{20, 0.8}}, 16);
  SearchConfig cfg;
  cfg.threshold = 0.7;
  const CandidateSet cand = bruteforce_generate(c);
  const auto out = exact_run(c, cand, cfg);
  EXPECT_EQ(out.size(), ground_truth(c, 0.7).size());
  for (const auto& p : out) EXPECT_TRUE(p.exact);
}

TEST(Config, DefaultsAndValidation) {
  SearchConfig cfg;
  const auto r = cfg.resolved();
  EXPECT_EQ(r.max_hashes, 4096U);
  EXPECT_EQ(r.lite_hashes, 128U);
  EXPECT_EQ(r.fixed_hashes, 2048U);
  EXPECT_EQ(r.epsilon, 0.03);
  EXPECT_EQ(r.gamma, 0.03);
  EXPECT_EQ(r.delta, 0.05);
  EXPECT_EQ(r.batch, 32U);
  cfg.mode = MeasureMode::kJaccard;
  const auto j = cfg.resolved();
  EXPECT_EQ(j.max_hashes, 512U);
  EXPECT_EQ(j.lite_hashes, 64U);
  EXPECT_EQ(j.fixed_hashes, 360U);

  SearchConfig bad;
  bad.lite_hashes = 100;
  EXPECT_THROW(bad.resolved(), UsageError);
  bad = {};
  bad.max_hashes = 1000;
  EXPECT_THROW(bad.resolved(), UsageError);
  bad = {};
  bad.threshold = 1.0;
  EXPECT_THROW(bad.resolved(), UsageError);
  bad = {};
  bad.fixed_hashes = 8192;
  EXPECT_NO_THROW(bad.resolved());
  bad.verifier = Verifier::kLshApprox;
  EXPECT_THROW(bad.resolved(), UsageError);
  EXPECT_EQ(parse_verifier("bayeslsh-lite"), Verifier::kBayesLshLite);
  EXPECT_EQ(parse_generator("allpairs"), Generator::kAllPairs);
  EXPECT_THROW(parse_verifier("magic"), UsageError);
}

TEST(Pipeline, SearchAndTsv) {
  const Corpus c = planted(300, {{20, 0.9}}, 17);
  SearchConfig cfg;
  cfg.threshold = 0.8;
  cfg.seed = 9;
  const auto result = search(c, cfg);
  ASSERT_TRUE(result.banding.has_value());
  EXPECT_EQ(result.banding->l, num_tables(0.03, c2r(0.8), result.banding->b));
  EXPECT_GE(result.pairs.size(), 19U);
  std::ostringstream out;
  write_results_tsv(out, c, result.pairs, {"seed: 9"});
  const std::string s = out.str();
  EXPECT_EQ(s.rfind("# seed: 9\n# id_i\tid_j\testimate\texact\tlow_confidence\n", 0), 0U);
  const auto& p = result.pairs.front();
  EXPECT_NE(s.find(fmt::format("{}\t{}\t{:.6f}\t0\t0\n", c[p.i].id, c[p.j].id, p.estimate)),
            std::string::npos);
}

TEST(Pipeline, AllPairsGeneratorWithJaccardIsUsageError) {
  const Corpus c = planted(50, {}, 18, MeasureMode::kJaccard);
  SearchConfig cfg;
  cfg.mode = MeasureMode::kJaccard;
  cfg.generator = Generator::kAllPairs;
  EXPECT_THROW(search(c, cfg), UsageError);
}

// Accuracy guarantee: the share of estimates off by more than delta stays
// within 2 gamma over a large planted population.
TEST(Statistical, EstimateErrorsWithinTwiceGamma) {
  const Corpus c = planted(2600, {{400, 0.75}, {400, 0.85}, {400, 0.95}}, 19);
  SearchConfig cfg;
  cfg.threshold = 0.7;
  cfg.seed = 23;
  cfg.threads = 4;
  const auto result = search(c, cfg);
  ASSERT_GE(result.pairs.size(), 1000U);
  std::size_t off = 0;
  for (const auto& p : result.pairs) {
    off += std::abs(p.estimate - exact_similarity(c, p.i, p.j)) > cfg.delta ? 1 : 0;
  }
  EXPECT_LE(static_cast<double>(off) / result.pairs.size(), 2 * cfg.gamma);
}

TEST(Eval, ReportCountsAndJson) {
  const Corpus c = planted(300, {{20, 0.9}, {20, 0.75}}, 20);
  SearchConfig cfg;
  cfg.threshold = 0.7;
  cfg.seed = 2;
  const auto result = search(c, cfg);
  const auto truth = ground_truth(c, 0.7);
  const auto r = evaluate(c, cfg, result, truth);
  EXPECT_EQ(r.truth, truth.size());
  EXPECT_EQ(r.emitted, result.pairs.size());
  EXPECT_EQ(r.true_positives + r.false_negatives, r.truth);
  EXPECT_EQ(r.true_positives + r.false_positives, r.emitted);
  std::size_t total = 0;
  for (auto h : r.error_histogram) total += h;
  EXPECT_EQ(total, r.emitted);
  EXPECT_GE(r.recall, 0.0);
  EXPECT_LE(r.recall, 1.0);
  const std::string json = eval_json(r);
  EXPECT_EQ(json.find('\n'), std::string::npos);
  EXPECT_NE(json.find("\"recall\""), std::string::npos);
  std::ostringstream tsv;
  write_eval_tsv(tsv, r);
  EXPECT_EQ(tsv.str().rfind("# key\tvalue\n", 0), 0U);
  EXPECT_THROW(ground_truth(c, 0.7, 1, 10), GuardError);
}

}  // namespace
}  // namespace bayeslsh
