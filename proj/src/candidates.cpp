// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BayesLSH Authors

#include "bayeslsh/candidates.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "bayeslsh/error.hpp"
#include "bayeslsh/util.hpp"

namespace bayeslsh {

std::size_t num_tables(double eps_fn, double t, std::size_t b) {
  if (!(eps_fn > 0.0 && eps_fn < 1.0)) {
    throw UsageError(fmt::format("false-negative rate must lie in (0, 1), got {}", eps_fn));
  }
  if (!(t > 0.0 && t < 1.0)) {
    throw UsageError(fmt::format("threshold must lie in (0, 1), got {}", t));
  }
  if (b == 0) throw UsageError("band width must be >= 1");
  const double band_hit = std::pow(t, static_cast<double>(b));
  const double log_miss = std::log1p(-band_hit);
  if (band_hit >= 1.0 || log_miss == 0.0 || !std::isfinite(log_miss)) {
    throw NumericError(fmt::format(
        "t^b = {} is numerically degenerate for t = {}, b = {}", band_hit, t, b));
  }
  const double l = std::ceil(std::log(eps_fn) / log_miss);
  return std::max<std::size_t>(1, static_cast<std::size_t>(l));
}

BandingParams make_banding(double eps_fn, double t_collision, std::size_t b) {
  return {b, num_tables(eps_fn, t_collision, b), eps_fn};
}

BandingParams auto_banding(double eps_fn, double t_collision, std::size_t hash_budget) {
  BandingParams best{0, 0, eps_fn};
  for (std::size_t b = 1; b <= hash_budget; ++b) {
    std::size_t l = 0;
    try {
      l = num_tables(eps_fn, t_collision, b);
    } catch (const NumericError&) {
      break;
    }
    if (b * l <= hash_budget) best = {b, l, eps_fn};
    // b*l grows roughly like b / t^b; once far past the budget it never returns.
    if (b * l > 4 * hash_budget) break;
  }
  if (best.b == 0) {
    throw GuardError(fmt::format(
        "no band width fits {} hashes at false-negative rate {} and collision probability {}",
        hash_budget, eps_fn, t_collision));
  }
  return best;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::uint32_t> nonempty_objects(const Corpus& c) {
  std::vector<std::uint32_t> ids;
  ids.reserve(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!c[i].empty()) ids.push_back(static_cast<std::uint32_t>(i));
  }
  return ids;
}

std::uint64_t band_key(const SignatureStore& store, std::size_t object, std::size_t from,
                       std::size_t to, std::uint64_t seed) {
  const auto row = store.row(object);
  std::uint64_t h = mix64(seed ^ from);
  if (store.measure() == Measure::kJaccard) {
    for (std::size_t i = from; i < to; ++i) h = mix64(h ^ row[i]);
    return h;
  }
  std::size_t i = from;
  while (i < to) {
    const std::size_t take = std::min<std::size_t>(64 - i % 64, to - i);
    std::uint64_t chunk = row[i / 64] >> (i % 64);
    if (take < 64) chunk &= (1ULL << take) - 1;
    h = mix64(h ^ chunk);
    i += take;
  }
  return h;
}

std::uint64_t pair_key(std::uint32_t i, std::uint32_t j) {
  return (static_cast<std::uint64_t>(i) << 32) | j;
}

CandidateSet table_pairs(const SignatureStore& store, const std::vector<std::uint32_t>& ids,
                         std::size_t from, std::size_t to, std::uint64_t seed,
                         std::size_t budget) {
  std::vector<std::pair<std::uint64_t, std::uint32_t>> keyed;
  keyed.reserve(ids.size());
  for (std::uint32_t id : ids) keyed.emplace_back(band_key(store, id, from, to, seed), id);
  std::sort(keyed.begin(), keyed.end());
  CandidateSet out;
  for (std::size_t lo = 0; lo < keyed.size();) {
    std::size_t hi = lo + 1;
    while (hi < keyed.size() && keyed[hi].first == keyed[lo].first) ++hi;
    for (std::size_t a = lo; a < hi; ++a) {
      for (std::size_t b = a + 1; b < hi; ++b) {
        out.push_back({keyed[a].second, keyed[b].second});  // ids ascending within a run
      }
    }
    if (out.size() > budget) {
      throw GuardError(fmt::format(
          "a single band table produced more than {} pairs; raise the band width", budget));
    }
    lo = hi;
  }
  return out;
}

}  // namespace

CandidateSet lsh_banding_generate(const SignatureStore& store, const BandingParams& params,
                                  const GeneratorLimits& limits) {
  if (params.b == 0 || params.l == 0) throw UsageError("banding needs b >= 1 and l >= 1");
  const std::size_t required = params.hashes_required();
  if (store.hashes_available() < required) {
    throw UsageError(fmt::format("banding needs b*l = {} hashes, only {} available", required,
                                 store.hashes_available()));
  }
  const auto ids = nonempty_objects(store.corpus());
  std::unordered_set<std::uint64_t> seen;
  CandidateSet result;
  const std::size_t wave = std::max(1U, limits.threads);
  for (std::size_t first = 0; first < params.l; first += wave) {
    const std::size_t count = std::min(wave, params.l - first);
    std::vector<CandidateSet> tables(count);
    parallel_for(count, limits.threads, [&](std::size_t w) {
      const std::size_t j = first + w;
      tables[w] = table_pairs(store, ids, j * params.b, (j + 1) * params.b, limits.mix_seed,
                              limits.max_candidates);
    });
    for (const auto& table : tables) {
      for (const auto& p : table) {
        if (seen.insert(pair_key(p.i, p.j)).second) result.push_back(p);
      }
      if (result.size() > limits.max_candidates) {
        throw GuardError(fmt::format("candidate budget of {} pairs exceeded",
                                     limits.max_candidates));
      }
    }
  }
  std::sort(result.begin(), result.end());
  return result;
}

CandidateSet allpairs_generate(const Corpus& c, double t, const GeneratorLimits& limits) {
  if (c.measure() != Measure::kCosine) {
    throw UsageError("the allpairs generator supports cosine modes only; use lsh for jaccard");
  }
  if (!(t > 0.0 && t < 1.0)) throw UsageError("threshold must lie in (0, 1)");

  const std::size_t dim = c.dimension();
  std::vector<std::uint32_t> df(dim, 0);
  std::vector<double> max_weight(dim, 0.0);
  for (const auto& v : c.vectors()) {
    for (const auto& e : v.entries) {
      ++df[e.feature];
      max_weight[e.feature] = std::max(max_weight[e.feature], e.weight);
    }
  }
  // Global processing order: decreasing document frequency, ties by id.
  std::vector<std::uint32_t> rank(dim);
  {
    std::vector<std::uint32_t> order(dim);
    std::iota(order.begin(), order.end(), 0U);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      return df[a] != df[b] ? df[a] > df[b] : a < b;
    });
    for (std::uint32_t r = 0; r < dim; ++r) rank[order[r]] = r;
  }

  struct Posting {
    std::uint32_t object;
    double weight;
  };
  std::vector<std::vector<Posting>> index(dim);
  std::vector<std::uint32_t> stamp(c.size(), UINT32_MAX);
  std::vector<std::uint32_t> touched;
  CandidateSet result;

  std::vector<Entry> ordered;
  for (std::size_t x = 0; x < c.size(); ++x) {
    const auto& v = c[x];
    if (v.empty()) continue;
    ordered.assign(v.entries.begin(), v.entries.end());
    std::sort(ordered.begin(), ordered.end(), [&](const Entry& a, const Entry& b) {
      return rank[a.feature] < rank[b.feature];
    });

    touched.clear();
    for (const auto& e : ordered) {
      for (const auto& p : index[e.feature]) {
        if (stamp[p.object] != x) {
          stamp[p.object] = static_cast<std::uint32_t>(x);
          touched.push_back(p.object);
        }
      }
    }
    for (std::uint32_t y : touched) result.push_back({y, static_cast<std::uint32_t>(x)});
    if (result.size() > limits.max_candidates) {
      throw GuardError(
          fmt::format("candidate budget of {} pairs exceeded", limits.max_candidates));
    }

    // Leave unindexed the longest prefix whose best possible score stays < t.
    double bound = 0.0;
    for (const auto& e : ordered) {
      bound += max_weight[e.feature] * e.weight;
      if (bound >= t) index[e.feature].push_back({static_cast<std::uint32_t>(x), e.weight});
    }
  }
  std::sort(result.begin(), result.end());
  return result;
}

CandidateSet bruteforce_generate(const Corpus& c, std::uint64_t guard) {
  const auto ids = nonempty_objects(c);
  const std::uint64_t k = ids.size();
  const std::uint64_t pairs = k < 2 ? 0 : k * (k - 1) / 2;
  if (pairs > guard) {
    throw GuardError(fmt::format(
        "brute force would enumerate {} pairs (guard {}); sample the corpus instead", pairs,
        guard));
  }
  CandidateSet out;
  out.reserve(pairs);
  for (std::size_t a = 0; a < ids.size(); ++a) {
    for (std::size_t b = a + 1; b < ids.size(); ++b) out.push_back({ids[a], ids[b]});
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::array<char, 8> kMagic = {'B', 'L', 'S', 'H', 'C', 'N', 'D', '1'};

void put_le(std::ostream& out, std::uint64_t v, int bytes) {
  std::array<char, 8> b{};
  for (int i = 0; i < bytes; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b.data(), bytes);
}

std::uint64_t get_le(std::istream& in, int bytes) {
  std::array<unsigned char, 8> b{};
  in.read(reinterpret_cast<char*>(b.data()), bytes);
  if (!in) throw IoError("truncated candidate stream");
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

void write_candidates(std::ostream& out, const CandidateSet& pairs) {
  out.write(kMagic.data(), kMagic.size());
  put_le(out, pairs.size(), 8);
  for (const auto& p : pairs) {
    put_le(out, p.i, 4);
    put_le(out, p.j, 4);
  }
  if (!out) throw IoError("failed writing candidate stream");
}

CandidateSet read_candidates(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw IoError("not a candidate stream (bad magic)");
  const std::uint64_t count = get_le(in, 8);
  CandidateSet pairs;
  pairs.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1U << 20)));
  for (std::uint64_t k = 0; k < count; ++k) {
    CandidatePair p;
    p.i = static_cast<std::uint32_t>(get_le(in, 4));
    p.j = static_cast<std::uint32_t>(get_le(in, 4));
    if (p.i >= p.j) throw IoError(fmt::format("candidate record {} violates i < j", k));
    pairs.push_back(p);
  }
  return pairs;
}

void save_candidates(const std::filesystem::path& path, const CandidateSet& pairs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  write_candidates(out, pairs);
}

CandidateSet load_candidates(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  return read_candidates(in);
}

}  // namespace bayeslsh
