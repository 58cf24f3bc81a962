// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BayesLSH Authors

#include "bayeslsh/hashing.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>

#include <fmt/format.h>

#include "bayeslsh/error.hpp"
#include "bayeslsh/util.hpp"

namespace bayeslsh {

EncodedGaussian encode_gaussian_2byte(double x) noexcept {
  if (std::isnan(x)) return {32768, true};
  if (x <= -8.0) return {0, true};
  if (x >= 8.0) return {65535, true};
  const double scaled = std::floor((x + 8.0) * 4096.0);
  const auto code = static_cast<std::uint32_t>(scaled);
  return {static_cast<std::uint16_t>(std::min<std::uint32_t>(code, 65535)), false};
}

double decode_gaussian_2byte(std::uint16_t code) noexcept {
  return (static_cast<double>(code) + 0.5) / 4096.0 - 8.0;
}

// ---------------------------------------------------------------------------

CosineHashFamily::CosineHashFamily(std::uint64_t seed, std::size_t dim)
    : seed_(seed), dim_(dim) {}

void CosineHashFamily::reserve(std::size_t count) {
  const std::size_t want = (count + kBlock - 1) / kBlock;
  while (blocks_.size() < want) {
    const std::size_t b = blocks_.size();
    std::vector<std::uint16_t> block(dim_ * kBlock);
    for (std::size_t lane = 0; lane < kBlock; ++lane) {
      std::mt19937_64 rng(stream_seed(seed_, b * kBlock + lane));
      std::normal_distribution<double> gauss(0.0, 1.0);
      for (std::size_t f = 0; f < dim_; ++f) {
        const auto enc = encode_gaussian_2byte(gauss(rng));
        clamped_ += enc.clamped ? 1 : 0;
        block[f * kBlock + lane] = enc.code;
      }
    }
    blocks_.push_back(std::move(block));
  }
}

double CosineHashFamily::component(std::size_t hash, FeatureId feature) const {
  if (hash >= capacity() || feature >= dim_) {
    throw ContractViolation("plane component out of range");
  }
  return decode_gaussian_2byte(blocks_[hash / kBlock][feature * kBlock + hash % kBlock]);
}

void CosineHashFamily::project(const SparseVector& v, std::size_t from, std::size_t to,
                               std::span<std::uint64_t> row) const {
  if (from > to || to > capacity()) {
    throw ContractViolation(
        fmt::format("projection range [{}, {}) exceeds family capacity {}", from, to,
                    capacity()));
  }
  if (row.size() * 64 < to) throw ContractViolation("signature row too short");
  for (const auto& e : v.entries) {
    if (e.feature >= dim_) {
      throw ContractViolation(
          fmt::format("feature {} outside family dimension {}", e.feature, dim_));
    }
  }
  std::array<double, kBlock> acc{};
  for (std::size_t b = from / kBlock; b * kBlock < to; ++b) {
    acc.fill(0.0);
    const std::uint16_t* block = blocks_[b].data();
    for (const auto& e : v.entries) {
      const std::uint16_t* codes = block + static_cast<std::size_t>(e.feature) * kBlock;
      for (std::size_t lane = 0; lane < kBlock; ++lane) {
        acc[lane] += e.weight * decode_gaussian_2byte(codes[lane]);
      }
    }
    const std::size_t lo = std::max(from, b * kBlock);
    const std::size_t hi = std::min(to, (b + 1) * kBlock);
    for (std::size_t i = lo; i < hi; ++i) {
      const std::uint64_t bit = 1ULL << (i % 64);
      if (acc[i - b * kBlock] >= 0.0) {
        row[i / 64] |= bit;
      } else {
        row[i / 64] &= ~bit;
      }
    }
  }
}

std::vector<std::uint8_t> cosine_signature(CosineHashFamily& fam, const SparseVector& v,
                                           std::size_t from, std::size_t to) {
  fam.reserve(to);
  std::vector<std::uint64_t> row((to + 63) / 64, 0);
  fam.project(v, from, to, row);
  std::vector<std::uint8_t> bits;
  bits.reserve(to - from);
  for (std::size_t i = from; i < to; ++i) bits.push_back((row[i / 64] >> (i % 64)) & 1U);
  return bits;
}

// ---------------------------------------------------------------------------

namespace {

__extension__ using u128 = unsigned __int128;

std::uint64_t mod_mersenne61(u128 x) noexcept {
  constexpr std::uint64_t p = MinhashFamily::kPrime;
  std::uint64_t r = static_cast<std::uint64_t>(x & p) + static_cast<std::uint64_t>(x >> 61);
  r = (r & p) + (r >> 61);
  return r >= p ? r - p : r;
}

std::uint64_t scramble(FeatureId element) noexcept {
  return mod_mersenne61(mix64(element));
}

}  // namespace

MinhashFamily::MinhashFamily(std::uint64_t seed) : seed_(seed) {}

void MinhashFamily::reserve(std::size_t count) {
  while (params_.size() < count) {
    std::mt19937_64 rng(stream_seed(seed_, params_.size()));
    std::uniform_int_distribution<std::uint64_t> pick_a(1, kPrime - 1);
    std::uniform_int_distribution<std::uint64_t> pick_b(0, kPrime - 1);
    Params p;
    p.a = pick_a(rng);
    p.b = pick_b(rng);
    params_.push_back(p);
  }
}

std::uint64_t MinhashFamily::hash(std::size_t i, FeatureId element) const noexcept {
  const Params& p = params_[i];
  return mod_mersenne61(static_cast<u128>(p.a) * scramble(element) + p.b);
}

void MinhashFamily::signature(const SparseVector& v, std::size_t from, std::size_t to,
                              std::span<std::uint64_t> out) const {
  if (v.empty()) {
    throw ContractViolation(fmt::format("minhash of empty set '{}' has no minimum", v.id));
  }
  if (from > to || to > capacity()) {
    throw ContractViolation(fmt::format("minhash range [{}, {}) exceeds capacity {}", from,
                                        to, capacity()));
  }
  if (out.size() < to - from) throw ContractViolation("minhash output span too short");
  std::vector<std::uint64_t> elems;
  elems.reserve(v.size());
  for (const auto& e : v.entries) elems.push_back(scramble(e.feature));
  for (std::size_t i = from; i < to; ++i) {
    const Params& p = params_[i];
    std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
    for (std::uint64_t x : elems) {
      best = std::min(best, mod_mersenne61(static_cast<u128>(p.a) * x + p.b));
    }
    out[i - from] = best;
  }
}

std::vector<std::uint64_t> minhash_signature(MinhashFamily& fam, const SparseVector& v,
                                             std::size_t from, std::size_t to) {
  fam.reserve(to);
  std::vector<std::uint64_t> out(to - from);
  fam.signature(v, from, to, out);
  return out;
}

// ---------------------------------------------------------------------------

std::size_t default_max_hashes(Measure measure) noexcept {
  return measure == Measure::kCosine ? kDefaultMaxCosineHashes : kDefaultMaxJaccardHashes;
}

namespace {

SignatureConfig resolve(SignatureConfig config, Measure measure) {
  if (config.batch == 0) throw UsageError("hash batch size must be >= 1");
  if (config.max_hashes == 0) config.max_hashes = default_max_hashes(measure);
  if (config.max_hashes % config.batch != 0) {
    throw UsageError(fmt::format("max hashes {} is not a multiple of the batch size {}",
                                 config.max_hashes, config.batch));
  }
  return config;
}

std::variant<CosineHashFamily, MinhashFamily> make_family(const Corpus& corpus,
                                                          std::uint64_t seed) {
  if (corpus.measure() == Measure::kCosine) {
    return CosineHashFamily(seed, corpus.dimension());
  }
  return MinhashFamily(seed);
}

}  // namespace

SignatureStore::SignatureStore(const Corpus& corpus, SignatureConfig config)
    : corpus_(&corpus),
      measure_(corpus.measure()),
      config_(resolve(config, corpus.measure())),
      stride_(measure_ == Measure::kCosine ? (config_.max_hashes + 63) / 64
                                           : config_.max_hashes),
      data_(stride_ * corpus.size(), 0),
      family_(make_family(corpus, config_.seed)) {}

std::span<std::uint64_t> SignatureStore::mutable_row(std::size_t object) {
  return {data_.data() + object * stride_, stride_};
}

std::span<const std::uint64_t> SignatureStore::row(std::size_t object) const {
  return {data_.data() + object * stride_, stride_};
}

void SignatureStore::extend(std::size_t target) {
  const std::size_t batch = config_.batch;
  target = (target + batch - 1) / batch * batch;
  if (target <= available_) return;
  if (target > config_.max_hashes) {
    throw GuardError(fmt::format("requested {} hashes exceeds the max-hash cap of {}",
                                 target, config_.max_hashes));
  }
  const std::size_t from = available_;
  const auto& vectors = corpus_->vectors();
  if (auto* fam = std::get_if<CosineHashFamily>(&family_)) {
    fam->reserve(target);
    parallel_for(vectors.size(), config_.threads, [&](std::size_t i) {
      fam->project(vectors[i], from, target, mutable_row(i));
    });
  } else {
    auto& mh = std::get<MinhashFamily>(family_);
    mh.reserve(target);
    parallel_for(vectors.size(), config_.threads, [&](std::size_t i) {
      auto out = mutable_row(i).subspan(from, target - from);
      if (vectors[i].empty()) {
        // Sentinel outside the hash range; empty objects never become candidates.
        std::fill(out.begin(), out.end(), MinhashFamily::kPrime);
      } else {
        mh.signature(vectors[i], from, target, out);
      }
    });
  }
  available_ = target;
}

MatchCount SignatureStore::count_matches(std::size_t x, std::size_t y, std::size_t from,
                                         std::size_t to) const {
  if (from > to || to > available_) {
    throw ContractViolation(fmt::format(
        "hash range [{}, {}) not available (hashes available: {})", from, to, available_));
  }
  if (x >= size() || y >= size()) throw ContractViolation("object index out of range");
  const auto rx = row(x);
  const auto ry = row(y);
  MatchCount mc{0, static_cast<std::uint32_t>(to - from)};
  if (from == to) return mc;
  if (measure_ == Measure::kJaccard) {
    std::uint32_t m = 0;
    for (std::size_t i = from; i < to; ++i) m += rx[i] == ry[i] ? 1 : 0;
    mc.m = m;
    return mc;
  }
  const std::size_t w0 = from / 64;
  const std::size_t w1 = (to - 1) / 64;
  std::uint32_t m = 0;
  for (std::size_t w = w0; w <= w1; ++w) {
    std::uint64_t same = ~(rx[w] ^ ry[w]);
    if (w == w0 && from % 64 != 0) same &= ~0ULL << (from % 64);
    if (w == w1 && to % 64 != 0) same &= ~0ULL >> (64 - to % 64);
    m += static_cast<std::uint32_t>(std::popcount(same));
  }
  mc.m = m;
  return mc;
}

std::uint64_t SignatureStore::hash_value(std::size_t object, std::size_t i) const {
  if (i >= available_ || object >= size()) throw ContractViolation("hash index out of range");
  const auto r = row(object);
  if (measure_ == Measure::kJaccard) return r[i];
  return (r[i / 64] >> (i % 64)) & 1U;
}

// ---------------------------------------------------------------------------
// Binary dump, little-endian.

namespace {

constexpr std::array<char, 8> kMagic = {'B', 'L', 'S', 'H', 'S', 'I', 'G', '1'};

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b.data(), b.size());
}

std::uint64_t get_u64(std::istream& in) {
  std::array<unsigned char, 8> b{};
  in.read(reinterpret_cast<char*>(b.data()), b.size());
  if (!in) throw IoError("truncated signature dump");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

std::size_t words_for(Measure measure, std::size_t hashes) {
  return measure == Measure::kCosine ? (hashes + 63) / 64 : hashes;
}

}  // namespace

void SignatureStore::write(std::ostream& out) const {
  out.write(kMagic.data(), kMagic.size());
  out.put(measure_ == Measure::kCosine ? 0 : 1);
  put_u64(out, size());
  put_u64(out, available_);
  put_u64(out, config_.seed);
  const std::size_t words = words_for(measure_, available_);
  for (std::size_t i = 0; i < size(); ++i) {
    const auto r = row(i);
    for (std::size_t w = 0; w < words; ++w) put_u64(out, r[w]);
  }
  if (!out) throw IoError("failed writing signature dump");
}

SignatureStore SignatureStore::read(std::istream& in, const Corpus& corpus,
                                    SignatureConfig config) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw IoError("not a signature dump (bad magic)");
  const int measure_byte = in.get();
  if (measure_byte != 0 && measure_byte != 1) throw IoError("bad measure in signature dump");
  const Measure measure = measure_byte == 0 ? Measure::kCosine : Measure::kJaccard;
  if (measure != corpus.measure()) {
    throw UsageError("signature dump measure does not match the corpus");
  }
  const std::uint64_t count = get_u64(in);
  const std::uint64_t hashes = get_u64(in);
  config.seed = get_u64(in);
  if (count != corpus.size()) {
    throw UsageError(fmt::format("signature dump holds {} objects, corpus has {}", count,
                                 corpus.size()));
  }
  SignatureStore store(corpus, config);
  if (hashes > store.max_hashes() || hashes % store.batch() != 0) {
    throw UsageError(fmt::format(
        "signature dump has {} hashes; incompatible with batch {} / cap {}", hashes,
        store.batch(), store.max_hashes()));
  }
  const std::size_t words = words_for(measure, hashes);
  for (std::size_t i = 0; i < count; ++i) {
    auto r = store.mutable_row(i);
    for (std::size_t w = 0; w < words; ++w) r[w] = get_u64(in);
  }
  store.available_ = hashes;
  return store;
}

void SignatureStore::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  write(out);
}

SignatureStore SignatureStore::load(const std::filesystem::path& path, const Corpus& corpus,
                                    SignatureConfig config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  return read(in, corpus, config);
}

void extend_signatures(SignatureStore& store, std::size_t target) { store.extend(target); }

MatchCount count_matches(const SignatureStore& store, std::size_t x, std::size_t y,
                         std::size_t from, std::size_t to) {
  return store.count_matches(x, y, from, to);
}

}  // namespace bayeslsh
