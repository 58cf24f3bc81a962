// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BayesLSH Authors

#include "bayeslsh/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "bayeslsh/error.hpp"

namespace bayeslsh {

namespace {

constexpr double kNormTolerance = 1e-6;

void normalize(SparseVector& v) {
  const double norm = std::sqrt(v.squared_norm());
  if (norm == 0.0 || std::abs(norm - 1.0) <= 1e-15) return;
  for (auto& e : v.entries) e.weight /= norm;
}

std::string_view trim_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

FeatureId parse_feature(std::string_view tok, std::size_t line_no) {
  FeatureId f = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), f);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError(fmt::format("bad feature id '{}'", tok), line_no);
  }
  return f;
}

double parse_weight(std::string_view tok, std::size_t line_no) {
  double w = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), w);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError(fmt::format("bad weight '{}'", tok), line_no);
  }
  if (!std::isfinite(w) || w <= 0.0) {
    throw ParseError(fmt::format("weight must be finite and positive, got '{}'", tok),
                     line_no);
  }
  return w;
}

SparseVector parse_line(std::string_view line, bool binary, std::size_t line_no) {
  const auto tab = line.find('\t');
  if (tab == std::string_view::npos) {
    throw ParseError("expected `id<TAB>features`", line_no);
  }
  SparseVector v;
  v.id = std::string(line.substr(0, tab));
  if (v.id.empty()) throw ParseError("empty vector id", line_no);

  std::string_view rest = line.substr(tab + 1);
  std::size_t pos = 0;
  while (pos < rest.size()) {
    while (pos < rest.size() && (rest[pos] == ' ' || rest[pos] == '\t')) ++pos;
    if (pos >= rest.size()) break;
    std::size_t end = pos;
    while (end < rest.size() && rest[end] != ' ' && rest[end] != '\t') ++end;
    const std::string_view tok = rest.substr(pos, end - pos);
    pos = end;

    const auto colon = tok.find(':');
    if (binary) {
      if (colon != std::string_view::npos) {
        throw ParseError(fmt::format("binary mode takes bare feature ids, got '{}'", tok),
                         line_no);
      }
      v.entries.push_back({parse_feature(tok, line_no), 1.0});
    } else {
      if (colon == std::string_view::npos) {
        throw ParseError(fmt::format("expected feature:weight, got '{}'", tok), line_no);
      }
      v.entries.push_back({parse_feature(tok.substr(0, colon), line_no),
                           parse_weight(tok.substr(colon + 1), line_no)});
    }
  }
  std::sort(v.entries.begin(), v.entries.end(),
            [](const Entry& a, const Entry& b) { return a.feature < b.feature; });
  for (std::size_t i = 1; i < v.entries.size(); ++i) {
    if (v.entries[i].feature == v.entries[i - 1].feature) {
      throw ParseError(fmt::format("duplicate feature {}", v.entries[i].feature), line_no);
    }
  }
  return v;
}

void validate(const SparseVector& v, MeasureMode mode) {
  for (std::size_t i = 0; i < v.entries.size(); ++i) {
    const auto& e = v.entries[i];
    if (i > 0 && e.feature <= v.entries[i - 1].feature) {
      throw ContractViolation(
          fmt::format("vector '{}': features not strictly increasing", v.id));
    }
    if (!std::isfinite(e.weight) || e.weight <= 0.0) {
      throw ContractViolation(fmt::format("vector '{}': non-positive weight", v.id));
    }
    if (is_binary(mode) && e.weight != 1.0) {
      throw ContractViolation(
          fmt::format("vector '{}': binary mode requires unit weights", v.id));
    }
  }
}

}  // namespace

double SparseVector::squared_norm() const noexcept {
  double s = 0.0;
  for (const auto& e : entries) s += e.weight * e.weight;
  return s;
}

Measure measure_of(MeasureMode mode) noexcept {
  return mode == MeasureMode::kJaccard ? Measure::kJaccard : Measure::kCosine;
}

bool is_binary(MeasureMode mode) noexcept { return mode != MeasureMode::kCosineWeighted; }

std::string_view to_string(MeasureMode mode) noexcept {
  switch (mode) {
    case MeasureMode::kCosineWeighted: return "cosine";
    case MeasureMode::kCosineBinary: return "cosine-binary";
    case MeasureMode::kJaccard: return "jaccard";
  }
  return "?";
}

std::string_view to_string(Measure measure) noexcept {
  return measure == Measure::kJaccard ? "jaccard" : "cosine";
}

MeasureMode parse_measure_mode(std::string_view text) {
  if (text == "cosine" || text == "cosine-weighted") return MeasureMode::kCosineWeighted;
  if (text == "cosine-binary") return MeasureMode::kCosineBinary;
  if (text == "jaccard") return MeasureMode::kJaccard;
  throw UsageError(fmt::format("unknown measure '{}'", text));
}

SimilarityThreshold::SimilarityThreshold(double t) : t_(t) {
  if (!(t > 0.0 && t < 1.0)) {
    throw UsageError(fmt::format("threshold must lie in (0, 1), got {}", t));
  }
}

Corpus::Corpus(std::vector<SparseVector> vectors, MeasureMode mode)
    : vectors_(std::move(vectors)), mode_(mode) {
  std::unordered_set<std::string_view> ids;
  ids.reserve(vectors_.size());
  for (auto& v : vectors_) {
    validate(v, mode_);
    if (!ids.insert(v.id).second) {
      throw ContractViolation(fmt::format("duplicate vector id '{}'", v.id));
    }
    if (!v.entries.empty()) {
      dimension_ = std::max<std::size_t>(dimension_, v.entries.back().feature + 1ULL);
    }
  }
  if (measure_of(mode_) == Measure::kCosine) {
    for (auto& v : vectors_) normalize(v);
  }
}

std::size_t Corpus::num_empty() const noexcept {
  return static_cast<std::size_t>(std::count_if(
      vectors_.begin(), vectors_.end(), [](const SparseVector& v) { return v.empty(); }));
}

Corpus parse_corpus(std::istream& in, MeasureMode mode, Weighting weighting) {
  if (weighting == Weighting::kTfIdf && mode != MeasureMode::kCosineWeighted) {
    throw UsageError("tf-idf weighting requires the weighted cosine mode");
  }
  std::vector<SparseVector> vectors;
  std::unordered_map<std::string, std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim_cr(line);
    if (view.empty() || view.front() == '#') continue;
    SparseVector v = parse_line(view, is_binary(mode), line_no);
    auto [it, inserted] = seen.emplace(v.id, line_no);
    if (!inserted) {
      throw ParseError(
          fmt::format("duplicate vector id '{}' (first seen on line {})", v.id, it->second),
          line_no);
    }
    vectors.push_back(std::move(v));
  }
  if (in.bad()) throw IoError("read failure while loading corpus");
  if (weighting == Weighting::kTfIdf) vectors = tfidf_weight(std::move(vectors));
  return Corpus(std::move(vectors), mode);
}

Corpus load_corpus(const std::filesystem::path& path, MeasureMode mode, Weighting weighting) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open corpus '{}'", path.string()));
  return parse_corpus(in, mode, weighting);
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  const bool binary = is_binary(corpus.mode());
  std::string buf;
  for (const auto& v : corpus.vectors()) {
    buf.clear();
    buf += v.id;
    buf += '\t';
    for (std::size_t i = 0; i < v.entries.size(); ++i) {
      if (i > 0) buf += ' ';
      if (binary) {
        fmt::format_to(std::back_inserter(buf), "{}", v.entries[i].feature);
      } else {
        // Shortest round-trip representation.
        fmt::format_to(std::back_inserter(buf), "{}:{}", v.entries[i].feature,
                       v.entries[i].weight);
      }
    }
    buf += '\n';
    out << buf;
  }
}

void save_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path);
  if (!out) throw IoError(fmt::format("cannot write corpus '{}'", path.string()));
  write_corpus(out, corpus);
  if (!out) throw IoError(fmt::format("write failure on '{}'", path.string()));
}

std::vector<SparseVector> tfidf_weight(std::vector<SparseVector> raw) {
  std::unordered_map<FeatureId, std::size_t> df;
  for (const auto& v : raw) {
    for (const auto& e : v.entries) ++df[e.feature];
  }
  const double n = static_cast<double>(raw.size());
  for (auto& v : raw) {
    std::vector<Entry> kept;
    kept.reserve(v.entries.size());
    for (const auto& e : v.entries) {
      const std::size_t d = df.at(e.feature);
      if (static_cast<double>(d) >= n) continue;  // idf = ln(1) = 0
      kept.push_back({e.feature, e.weight * std::log(n / static_cast<double>(d))});
    }
    v.entries = std::move(kept);
  }
  return raw;
}

Corpus tfidf_weight(const Corpus& c) {
  if (c.mode() != MeasureMode::kCosineWeighted) {
    throw UsageError("tf-idf weighting requires the weighted cosine mode");
  }
  return Corpus(tfidf_weight(c.vectors()), c.mode());
}

double sparse_dot(const SparseVector& x, const SparseVector& y) noexcept {
  double dot = 0.0;
  auto a = x.entries.begin();
  auto b = y.entries.begin();
  while (a != x.entries.end() && b != y.entries.end()) {
    if (a->feature < b->feature) {
      ++a;
    } else if (b->feature < a->feature) {
      ++b;
    } else {
      dot += a->weight * b->weight;
      ++a;
      ++b;
    }
  }
  return dot;
}

std::size_t intersection_size(const SparseVector& x, const SparseVector& y) noexcept {
  std::size_t common = 0;
  auto a = x.entries.begin();
  auto b = y.entries.begin();
  while (a != x.entries.end() && b != y.entries.end()) {
    if (a->feature < b->feature) {
      ++a;
    } else if (b->feature < a->feature) {
      ++b;
    } else {
      ++common;
      ++a;
      ++b;
    }
  }
  return common;
}

double cosine_exact(const SparseVector& x, const SparseVector& y) {
  for (const SparseVector* v : {&x, &y}) {
    if (v->empty()) return 0.0;
    const double norm = std::sqrt(v->squared_norm());
    if (std::abs(norm - 1.0) > kNormTolerance) {
      throw ContractViolation(
          fmt::format("cosine_exact: vector '{}' not normalized (norm {})", v->id, norm));
    }
  }
  return std::clamp(sparse_dot(x, y), 0.0, 1.0);
}

double jaccard_exact(const SparseVector& x, const SparseVector& y) {
  for (const SparseVector* v : {&x, &y}) {
    for (const auto& e : v->entries) {
      if (e.weight != 1.0) {
        throw ContractViolation(
            fmt::format("jaccard_exact: vector '{}' has a non-unit weight", v->id));
      }
    }
  }
  const std::size_t uni = x.size() + y.size();
  if (uni == 0) return 0.0;
  const std::size_t common = intersection_size(x, y);
  return static_cast<double>(common) / static_cast<double>(uni - common);
}

double exact_similarity(const Corpus& corpus, std::size_t i, std::size_t j) {
  const auto& x = corpus[i];
  const auto& y = corpus[j];
  if (corpus.measure() == Measure::kCosine) {
    return std::clamp(sparse_dot(x, y), 0.0, 1.0);
  }
  const std::size_t uni = x.size() + y.size();
  if (uni == 0) return 0.0;
  const std::size_t common = intersection_size(x, y);
  return static_cast<double>(common) / static_cast<double>(uni - common);
}

// ---------------------------------------------------------------------------
// Synthetic corpora

namespace {

constexpr double kPlantTolerance = 0.02;
constexpr int kPlantRetries = 100;

using Rng = std::mt19937_64;

std::vector<FeatureId> sample_features(Rng& rng, std::size_t dim, std::size_t count,
                                       const std::unordered_set<FeatureId>& exclude) {
  std::uniform_int_distribution<FeatureId> pick(0, static_cast<FeatureId>(dim - 1));
  std::unordered_set<FeatureId> chosen;
  std::vector<FeatureId> out;
  out.reserve(count);
  while (out.size() < count) {
    const FeatureId f = pick(rng);
    if (exclude.contains(f) || !chosen.insert(f).second) continue;
    out.push_back(f);
  }
  std::sort(out.begin(), out.end());
  return out;
}

SparseVector make_vector(const std::vector<FeatureId>& features, bool binary, Rng& rng) {
  std::uniform_real_distribution<double> weight(0.1, 1.0);
  SparseVector v;
  v.entries.reserve(features.size());
  for (FeatureId f : features) v.entries.push_back({f, binary ? 1.0 : weight(rng)});
  return v;
}

SparseVector combine(const SparseVector& x, double a, const SparseVector& z, double b) {
  SparseVector y;
  for (const auto& e : x.entries) y.entries.push_back({e.feature, a * e.weight});
  for (const auto& e : z.entries) y.entries.push_back({e.feature, b * e.weight});
  std::sort(y.entries.begin(), y.entries.end(),
            [](const Entry& p, const Entry& q) { return p.feature < q.feature; });
  return y;
}

double measured(const SparseVector& x, const SparseVector& y, MeasureMode mode) {
  if (mode == MeasureMode::kJaccard) return jaccard_exact(x, y);
  SparseVector xn = x;
  SparseVector yn = y;
  normalize(xn);
  normalize(yn);
  return cosine_exact(xn, yn);
}

// Set sizes (size_x, size_y, overlap) whose set similarity is closest to target.
struct SetPlan {
  std::size_t size = 0;
  std::size_t overlap = 0;
};

SetPlan plan_sets(double target, std::size_t base, MeasureMode mode) {
  SetPlan best;
  double best_err = 2.0;
  for (std::size_t size = base; size <= 2 * base; ++size) {
    for (std::size_t c = 0; c <= size; ++c) {
      const double l = static_cast<double>(size);
      const double cc = static_cast<double>(c);
      const double s = mode == MeasureMode::kJaccard ? cc / (2 * l - cc) : cc / l;
      const double err = std::abs(s - target);
      if (err < best_err) {
        best_err = err;
        best = {size, c};
      }
    }
  }
  return best;
}

std::pair<SparseVector, SparseVector> plant_pair(double target, const SyntheticSpec& spec,
                                                 Rng& rng) {
  const std::size_t base = spec.features_per_vector;
  if (spec.mode == MeasureMode::kCosineWeighted) {
    const auto xf = sample_features(rng, spec.dim, base, {});
    SparseVector x = make_vector(xf, false, rng);
    normalize(x);
    const std::unordered_set<FeatureId> used(xf.begin(), xf.end());
    SparseVector z = make_vector(sample_features(rng, spec.dim, base, used), false, rng);
    normalize(z);
    // x ⟂ z with disjoint supports, so cos(x, s x + sqrt(1 - s^2) z) = s.
    return {x, combine(x, target, z, std::sqrt(1.0 - target * target))};
  }
  const SetPlan plan = plan_sets(target, base, spec.mode);
  const auto shared = sample_features(rng, spec.dim, plan.overlap, {});
  std::unordered_set<FeatureId> used(shared.begin(), shared.end());
  const auto only_x = sample_features(rng, spec.dim, plan.size - plan.overlap, used);
  used.insert(only_x.begin(), only_x.end());
  const auto only_y = sample_features(rng, spec.dim, plan.size - plan.overlap, used);
  std::vector<FeatureId> xf = shared;
  xf.insert(xf.end(), only_x.begin(), only_x.end());
  std::vector<FeatureId> yf = shared;
  yf.insert(yf.end(), only_y.begin(), only_y.end());
  std::sort(xf.begin(), xf.end());
  std::sort(yf.begin(), yf.end());
  return {make_vector(xf, true, rng), make_vector(yf, true, rng)};
}

}  // namespace

Corpus generate_synthetic(const SyntheticSpec& spec) {
  if (spec.n < 2) throw UsageError("synthetic corpus needs n >= 2");
  if (spec.features_per_vector == 0) throw UsageError("features_per_vector must be >= 1");
  if (spec.dim < 4 * spec.features_per_vector) {
    throw UsageError(fmt::format("dim {} too small for {} features per vector", spec.dim,
                                 spec.features_per_vector));
  }
  Rng rng(spec.seed);
  std::vector<SparseVector> vectors;
  vectors.reserve(spec.n);

  std::size_t planted_total = 0;
  for (std::size_t g = 0; g < spec.planted.size(); ++g) {
    const auto& group = spec.planted[g];
    if (!(group.similarity > 0.0 && group.similarity < 1.0)) {
      throw UsageError(fmt::format("planted group {}: similarity {} outside (0, 1)", g,
                                   group.similarity));
    }
    planted_total += 2 * group.pairs;
    if (planted_total > spec.n) {
      throw UsageError(fmt::format(
          "planted group {} (similarity {}): {} planted objects exceed n = {}", g,
          group.similarity, planted_total, spec.n));
    }
    for (std::size_t p = 0; p < group.pairs; ++p) {
      bool ok = false;
      for (int attempt = 0; attempt < kPlantRetries && !ok; ++attempt) {
        auto [x, y] = plant_pair(group.similarity, spec, rng);
        if (std::abs(measured(x, y, spec.mode) - group.similarity) <= kPlantTolerance) {
          vectors.push_back(std::move(x));
          vectors.push_back(std::move(y));
          ok = true;
        }
      }
      if (!ok) {
        throw NumericError(fmt::format(
            "planted group {} (similarity {}) infeasible after {} retries", g,
            group.similarity, kPlantRetries));
      }
    }
  }
  const bool binary = is_binary(spec.mode);
  while (vectors.size() < spec.n) {
    vectors.push_back(
        make_vector(sample_features(rng, spec.dim, spec.features_per_vector, {}), binary, rng));
  }
  std::shuffle(vectors.begin(), vectors.end(), rng);
  for (std::size_t i = 0; i < vectors.size(); ++i) vectors[i].id = fmt::format("v{}", i);
  return Corpus(std::move(vectors), spec.mode);
}

}  // namespace bayeslsh
