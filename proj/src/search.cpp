// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BayesLSH Authors

#include "bayeslsh/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <random>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "bayeslsh/error.hpp"
#include "bayeslsh/util.hpp"

namespace bayeslsh {

namespace {

constexpr std::uint64_t kPriorStream = 0x9f1a;
constexpr std::uint64_t kFreshStream = 0xf4e5;

constexpr std::size_t kDefaultLiteCosine = 128;
constexpr std::size_t kDefaultLiteJaccard = 64;
constexpr std::size_t kDefaultFixedCosine = 2048;
constexpr std::size_t kDefaultFixedJaccard = 360;

enum class Step : std::uint8_t { kContinue, kPruned, kEmit, kEmitLowConfidence };

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool has_empty(const Corpus& corpus, const CandidatePair& p) {
  return corpus[p.i].empty() || corpus[p.j].empty();
}

void check_candidates(const Corpus& corpus, const CandidateSet& candidates) {
  for (const auto& p : candidates) {
    if (p.i >= p.j || p.j >= corpus.size()) {
      throw ContractViolation(fmt::format("candidate ({}, {}) is invalid for a corpus of {}",
                                          p.i, p.j, corpus.size()));
    }
  }
}

Step decide(const MinMatchTable& table, const ConcentrationCache& cache, std::uint32_t m,
            std::uint32_t n, std::size_t cap, double& estimate) {
  if (table.prunes(m, n)) return Step::kPruned;
  const Concentration c = concentration_lookup(cache, m, n);
  estimate = c.estimate;
  if (c.concentrated) return Step::kEmit;
  return n >= cap ? Step::kEmitLowConfidence : Step::kContinue;
}

// The store the verifier hashes with: the generator's unless fresh hashes
// were requested.
struct StoreHandle {
  std::optional<SignatureStore> owned;
  SignatureStore* store = nullptr;
};

StoreHandle verification_store(const Corpus& corpus, const SearchConfig& cfg,
                               SignatureStore* shared) {
  StoreHandle h;
  if (shared != nullptr && !cfg.fresh_verification_hashes) {
    if (&shared->corpus() != &corpus || shared->batch() != cfg.batch ||
        shared->max_hashes() < cfg.max_hashes) {
      throw ContractViolation("signature store does not match the search configuration");
    }
    h.store = shared;
    return h;
  }
  const std::uint64_t seed =
      cfg.fresh_verification_hashes ? stream_seed(cfg.seed, kFreshStream) : cfg.seed;
  h.owned.emplace(corpus, SignatureConfig{seed, cfg.batch, cfg.max_hashes, cfg.threads});
  h.store = &*h.owned;
  return h;
}

PosteriorModel posterior_for(const Corpus& corpus, const CandidateSet& candidates,
                             const SearchConfig& cfg, RunStats* stats) {
  if (cfg.measure() == Measure::kCosine) return PosteriorModel::cosine();
  BetaParams prior;
  if (cfg.fit_prior) {
    prior = fit_prior(corpus, candidates, cfg.prior_samples, stream_seed(cfg.seed, kPriorStream));
  }
  if (stats != nullptr) stats->prior = prior;
  return PosteriorModel::jaccard(prior);
}

void sort_output(std::vector<OutputPair>& out) {
  std::sort(out.begin(), out.end(), [](const OutputPair& a, const OutputPair& b) {
    return std::tie(a.i, a.j) < std::tie(b.i, b.j);
  });
}

}  // namespace

std::string_view to_string(Generator g) noexcept {
  switch (g) {
    case Generator::kLsh: return "lsh";
    case Generator::kAllPairs: return "allpairs";
    case Generator::kBruteForce: return "bruteforce";
  }
  return "?";
}

std::string_view to_string(Verifier v) noexcept {
  switch (v) {
    case Verifier::kBayesLsh: return "bayeslsh";
    case Verifier::kBayesLshLite: return "bayeslsh-lite";
    case Verifier::kLshApprox: return "lsh-approx";
    case Verifier::kExact: return "exact";
  }
  return "?";
}

Generator parse_generator(std::string_view text) {
  for (auto g : {Generator::kLsh, Generator::kAllPairs, Generator::kBruteForce}) {
    if (text == to_string(g)) return g;
  }
  throw UsageError(fmt::format("unknown generator '{}' (lsh, allpairs, bruteforce)", text));
}

Verifier parse_verifier(std::string_view text) {
  for (auto v : {Verifier::kBayesLsh, Verifier::kBayesLshLite, Verifier::kLshApprox,
                 Verifier::kExact}) {
    if (text == to_string(v)) return v;
  }
  throw UsageError(fmt::format(
      "unknown verifier '{}' (bayeslsh, bayeslsh-lite, lsh-approx, exact)", text));
}

SearchConfig SearchConfig::resolved() const {
  SearchConfig c = *this;
  const bool cosine = measure() == Measure::kCosine;
  auto open_unit = [](double v, const char* name) {
    if (!(v > 0.0 && v < 1.0)) {
      throw UsageError(fmt::format("{} must lie in (0, 1), got {}", name, v));
    }
  };
  open_unit(c.threshold, "threshold");
  open_unit(c.epsilon, "epsilon");
  open_unit(c.delta, "delta");
  open_unit(c.gamma, "gamma");
  open_unit(c.fn_rate, "fn-rate");
  if (c.batch == 0) throw UsageError("batch-hashes must be positive");
  if (c.max_hashes == 0) c.max_hashes = default_max_hashes(measure());
  if (c.lite_hashes == 0) c.lite_hashes = cosine ? kDefaultLiteCosine : kDefaultLiteJaccard;
  if (c.fixed_hashes == 0) c.fixed_hashes = cosine ? kDefaultFixedCosine : kDefaultFixedJaccard;
  if (c.max_hashes % c.batch != 0) {
    throw UsageError(fmt::format("max-hashes ({}) must be a multiple of batch-hashes ({})",
                                 c.max_hashes, c.batch));
  }
  if (c.lite_hashes % c.batch != 0 || c.lite_hashes > c.max_hashes) {
    throw UsageError(fmt::format(
        "lite-hashes ({}) must be a multiple of batch-hashes ({}) and at most max-hashes ({})",
        c.lite_hashes, c.batch, c.max_hashes));
  }
  if (c.verifier == Verifier::kLshApprox && c.fixed_hashes > c.max_hashes) {
    throw UsageError(fmt::format("LSH-Approx needs {} hashes but max-hashes is {}",
                                 c.fixed_hashes, c.max_hashes));
  }
  if (c.threads == 0) c.threads = default_threads();
  return c;
}

BetaParams fit_prior(const Corpus& corpus, const CandidateSet& candidates, std::size_t samples,
                     std::uint64_t seed) {
  std::vector<CandidatePair> picked;
  picked.reserve(std::min(samples, candidates.size()));
  std::mt19937_64 rng(seed);
  std::sample(candidates.begin(), candidates.end(), std::back_inserter(picked), samples, rng);
  std::vector<double> sims;
  sims.reserve(picked.size());
  for (const auto& p : picked) sims.push_back(exact_similarity(corpus, p.i, p.j));
  return fit_beta_mom(sims);
}

VerifyOutcome bayeslsh_verify_pair(const VerificationContext& ctx, const CandidatePair& pair,
                                   std::vector<TraceStep>* trace) {
  const std::size_t k = ctx.table.batch();
  const std::size_t cap = ctx.table.max_hashes();
  VerifyOutcome out;
  if (has_empty(ctx.corpus, pair)) {
    out.pruned = true;
    return out;
  }
  MatchCount mc;
  while (mc.n < cap) {
    const std::size_t to = mc.n + k;
    if (ctx.store.hashes_available() < to) ctx.store.extend(to);
    mc += ctx.store.count_matches(pair.i, pair.j, mc.n, to);
    double estimate = 0.0;
    const Step step = decide(ctx.table, ctx.cache, mc.m, mc.n, cap, estimate);
    if (trace != nullptr) trace->push_back({mc.m, mc.n, step == Step::kPruned});
    out.hashes_used = mc.n;
    if (step == Step::kPruned) {
      out.pruned = true;
      return out;
    }
    if (step != Step::kContinue) {
      out.estimate = estimate;
      out.low_confidence = step == Step::kEmitLowConfidence;
      return out;
    }
  }
  return out;
}

std::vector<OutputPair> bayeslsh_run(const Corpus& corpus, const CandidateSet& candidates,
                                     const SearchConfig& config, SignatureStore* store,
                                     RunStats* stats) {
  const SearchConfig cfg = config.resolved();
  check_candidates(corpus, candidates);
  RunStats local;
  RunStats& st = stats != nullptr ? *stats : local;
  st = RunStats{};
  st.candidates = candidates.size();

  const PosteriorModel posterior = posterior_for(corpus, candidates, cfg, &st);
  const MinMatchTable table =
      MinMatchTable::build(posterior, cfg.threshold, cfg.epsilon, cfg.batch, cfg.max_hashes);
  const ConcentrationCache cache(posterior, {cfg.delta, cfg.gamma}, cfg.use_cache);
  StoreHandle handle = verification_store(corpus, cfg, store);
  SignatureStore& sigs = *handle.store;

  const std::size_t rounds = cfg.max_hashes / cfg.batch;
  std::vector<std::uint32_t> matches(candidates.size(), 0);
  std::vector<Step> status(candidates.size(), Step::kContinue);
  std::vector<double> estimates(candidates.size(), 0.0);
  std::vector<std::uint32_t> active;
  active.reserve(candidates.size());
  std::size_t pruned = 0;
  for (std::uint32_t c = 0; c < candidates.size(); ++c) {
    if (has_empty(corpus, candidates[c])) {
      ++pruned;
    } else {
      active.push_back(c);
    }
  }

  std::vector<OutputPair> out;
  std::uint32_t n = 0;
  for (std::size_t round = 0; round < rounds && !active.empty(); ++round) {
    const std::uint32_t from = n;
    n += static_cast<std::uint32_t>(cfg.batch);
    sigs.extend(n);
    parallel_for(active.size(), cfg.threads, [&](std::size_t a) {
      const std::uint32_t c = active[a];
      const CandidatePair& p = candidates[c];
      matches[c] += sigs.count_matches(p.i, p.j, from, n).m;
      status[c] = decide(table, cache, matches[c], n, cfg.max_hashes, estimates[c]);
    });
    st.hashes_compared += active.size() * cfg.batch;
    std::size_t kept = 0;
    for (const std::uint32_t c : active) {
      switch (status[c]) {
        case Step::kContinue: active[kept++] = c; break;
        case Step::kPruned: ++pruned; break;
        case Step::kEmit:
        case Step::kEmitLowConfidence: {
          const bool low = status[c] == Step::kEmitLowConfidence;
          st.low_confidence += low ? 1 : 0;
          out.push_back({candidates[c].i, candidates[c].j, estimates[c], false, low, n});
          break;
        }
      }
    }
    active.resize(kept);
    st.survivors.push_back(candidates.size() - pruned);
  }
  st.survivors.resize(rounds, candidates.size() - pruned);
  sort_output(out);
  return out;
}

std::vector<OutputPair> bayeslsh_lite_run(const Corpus& corpus, const CandidateSet& candidates,
                                          const SearchConfig& config, SignatureStore* store,
                                          RunStats* stats) {
  const SearchConfig cfg = config.resolved();
  check_candidates(corpus, candidates);
  RunStats local;
  RunStats& st = stats != nullptr ? *stats : local;
  st = RunStats{};
  st.candidates = candidates.size();

  const PosteriorModel posterior = posterior_for(corpus, candidates, cfg, &st);
  const std::size_t rounds = cfg.lite_hashes / cfg.batch;
  std::vector<std::uint8_t> alive(candidates.size(), 1);
  std::size_t pruned = 0;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (has_empty(corpus, candidates[c])) {
      alive[c] = 0;
      ++pruned;
    }
  }

  if (rounds > 0) {
    const MinMatchTable table = MinMatchTable::build(posterior, cfg.threshold, cfg.epsilon,
                                                     cfg.batch, cfg.lite_hashes);
    StoreHandle handle = verification_store(corpus, cfg, store);
    SignatureStore& sigs = *handle.store;
    std::vector<std::uint32_t> matches(candidates.size(), 0);
    std::vector<std::uint32_t> active;
    for (std::uint32_t c = 0; c < candidates.size(); ++c) {
      if (alive[c] != 0) active.push_back(c);
    }
    std::uint32_t n = 0;
    for (std::size_t round = 0; round < rounds && !active.empty(); ++round) {
      const std::uint32_t from = n;
      n += static_cast<std::uint32_t>(cfg.batch);
      sigs.extend(n);
      parallel_for(active.size(), cfg.threads, [&](std::size_t a) {
        const std::uint32_t c = active[a];
        const CandidatePair& p = candidates[c];
        matches[c] += sigs.count_matches(p.i, p.j, from, n).m;
        if (table.prunes(matches[c], n)) alive[c] = 0;
      });
      st.hashes_compared += active.size() * cfg.batch;
      std::size_t kept = 0;
      for (const std::uint32_t c : active) {
        if (alive[c] != 0) {
          active[kept++] = c;
        } else {
          ++pruned;
        }
      }
      active.resize(kept);
      st.survivors.push_back(candidates.size() - pruned);
    }
    st.survivors.resize(rounds, candidates.size() - pruned);
  }

  std::vector<double> exact(candidates.size(), 0.0);
  parallel_for(candidates.size(), cfg.threads, [&](std::size_t c) {
    if (alive[c] != 0) exact[c] = exact_similarity(corpus, candidates[c].i, candidates[c].j);
  });
  std::vector<OutputPair> out;
  const auto h = static_cast<std::uint32_t>(cfg.lite_hashes);
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (alive[c] == 0) continue;
    ++st.exact_computations;
    if (exact[c] > cfg.threshold) {
      out.push_back({candidates[c].i, candidates[c].j, exact[c], true, false, h});
    }
  }
  return out;
}

std::vector<OutputPair> lsh_approx_run(const Corpus& corpus, const CandidateSet& candidates,
                                       const SearchConfig& config, SignatureStore* store,
                                       RunStats* stats) {
  const SearchConfig cfg = config.resolved();
  check_candidates(corpus, candidates);
  RunStats local;
  RunStats& st = stats != nullptr ? *stats : local;
  st = RunStats{};
  st.candidates = candidates.size();

  StoreHandle handle = verification_store(corpus, cfg, store);
  SignatureStore& sigs = *handle.store;
  const auto n = static_cast<std::uint32_t>(cfg.fixed_hashes);
  sigs.extend(n);
  std::vector<double> estimates(candidates.size(), -1.0);
  parallel_for(candidates.size(), cfg.threads, [&](std::size_t c) {
    const CandidatePair& p = candidates[c];
    if (has_empty(corpus, p)) return;
    const MatchCount mc = sigs.count_matches(p.i, p.j, 0, n);
    estimates[c] = ml_estimate(mc.m, mc.n, cfg.measure());
  });
  std::vector<OutputPair> out;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (estimates[c] < 0.0) continue;
    st.hashes_compared += n;
    if (estimates[c] >= cfg.threshold) {
      out.push_back({candidates[c].i, candidates[c].j, estimates[c], false, false, n});
    }
  }
  return out;
}

std::vector<OutputPair> exact_run(const Corpus& corpus, const CandidateSet& candidates,
                                  const SearchConfig& config, RunStats* stats) {
  const SearchConfig cfg = config.resolved();
  check_candidates(corpus, candidates);
  RunStats local;
  RunStats& st = stats != nullptr ? *stats : local;
  st = RunStats{};
  st.candidates = candidates.size();
  st.exact_computations = candidates.size();

  std::vector<double> exact(candidates.size(), 0.0);
  parallel_for(candidates.size(), cfg.threads, [&](std::size_t c) {
    exact[c] = exact_similarity(corpus, candidates[c].i, candidates[c].j);
  });
  std::vector<OutputPair> out;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (exact[c] > cfg.threshold) {
      out.push_back({candidates[c].i, candidates[c].j, exact[c], true, false, 0});
    }
  }
  return out;
}

double collision_threshold(Measure measure, double t) {
  return measure == Measure::kCosine ? c2r(t) : t;
}

CandidateSet generate_candidates(const Corpus& corpus, const SearchConfig& config,
                                 SignatureStore& store, std::optional<BandingParams>* banding,
                                 PhaseTimes* seconds) {
  const SearchConfig cfg = config.resolved();
  const GeneratorLimits limits{cfg.max_candidates, stream_seed(cfg.seed, 0x5eed), cfg.threads};
  switch (cfg.generator) {
    case Generator::kLsh: {
      const double tc = collision_threshold(cfg.measure(), cfg.threshold);
      const BandingParams params = cfg.band_width != 0
                                       ? make_banding(cfg.fn_rate, tc, cfg.band_width)
                                       : auto_banding(cfg.fn_rate, tc, store.max_hashes());
      if (params.hashes_required() > store.max_hashes()) {
        throw UsageError(fmt::format(
            "banding with b={} needs {} tables ({} hashes) but max-hashes is {}", params.b,
            params.l, params.hashes_required(), store.max_hashes()));
      }
      if (banding != nullptr) *banding = params;
      auto start = Clock::now();
      store.extend(params.hashes_required());
      if (seconds != nullptr) seconds->hashing += seconds_since(start);
      start = Clock::now();
      CandidateSet out = lsh_banding_generate(store, params, limits);
      if (seconds != nullptr) seconds->generation += seconds_since(start);
      return out;
    }
    case Generator::kAllPairs: {
      const auto start = Clock::now();
      CandidateSet out = allpairs_generate(corpus, cfg.threshold, limits);
      if (seconds != nullptr) seconds->generation += seconds_since(start);
      return out;
    }
    case Generator::kBruteForce: {
      const auto start = Clock::now();
      CandidateSet out = bruteforce_generate(corpus, cfg.max_candidates);
      if (seconds != nullptr) seconds->generation += seconds_since(start);
      return out;
    }
  }
  throw ContractViolation("unknown generator");
}

std::vector<OutputPair> verify_candidates(const Corpus& corpus, const CandidateSet& candidates,
                                          const SearchConfig& config, SignatureStore& store,
                                          RunStats* stats) {
  switch (config.verifier) {
    case Verifier::kBayesLsh: return bayeslsh_run(corpus, candidates, config, &store, stats);
    case Verifier::kBayesLshLite:
      return bayeslsh_lite_run(corpus, candidates, config, &store, stats);
    case Verifier::kLshApprox: return lsh_approx_run(corpus, candidates, config, &store, stats);
    case Verifier::kExact: return exact_run(corpus, candidates, config, stats);
  }
  throw ContractViolation("unknown verifier");
}

SearchResult search(const Corpus& corpus, const SearchConfig& config) {
  const SearchConfig cfg = config.resolved();
  SearchResult result;
  SignatureStore store(corpus, SignatureConfig{cfg.seed, cfg.batch, cfg.max_hashes, cfg.threads});
  const CandidateSet candidates =
      generate_candidates(corpus, cfg, store, &result.banding, &result.seconds);
  result.candidates = candidates.size();
  const auto start = Clock::now();
  result.pairs = verify_candidates(corpus, candidates, cfg, store, &result.stats);
  result.seconds.verification = seconds_since(start);
  return result;
}

void write_results_tsv(std::ostream& out, const Corpus& corpus,
                       const std::vector<OutputPair>& pairs,
                       const std::vector<std::string>& header_lines) {
  for (const auto& line : header_lines) fmt::print(out, "# {}\n", line);
  out << "# id_i\tid_j\testimate\texact\tlow_confidence\n";
  for (const auto& p : pairs) {
    fmt::print(out, "{}\t{}\t{:.6f}\t{:d}\t{:d}\n", corpus[p.i].id, corpus[p.j].id, p.estimate,
               p.exact, p.low_confidence);
  }
}

}  // namespace bayeslsh
