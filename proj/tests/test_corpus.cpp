// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BayesLSH Authors

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "bayeslsh/corpus.hpp"
#include "bayeslsh/error.hpp"
#include "oracles.hpp"

namespace bayeslsh {
namespace {

Corpus parse(const std::string& text, MeasureMode mode, Weighting w = Weighting::kNone) {
  std::istringstream in(text);
  return parse_corpus(in, mode, w);
}

TEST(Corpus, WeightedLineIsNormalized) {
  const Corpus c = parse("a\t1:2.0 3:1.0\n", MeasureMode::kCosineWeighted);
  ASSERT_EQ(c.size(), 1U);
  const auto& v = c[0];
  EXPECT_EQ(v.id, "a");
  ASSERT_EQ(v.size(), 2U);
  EXPECT_EQ(v.entries[0].feature, 1U);
  EXPECT_NEAR(v.entries[0].weight, 2.0 / std::sqrt(5.0), 1e-12);
  EXPECT_EQ(v.entries[1].feature, 3U);
  EXPECT_NEAR(v.entries[1].weight, 1.0 / std::sqrt(5.0), 1e-12);
  EXPECT_EQ(c.dimension(), 4U);
}

TEST(Corpus, BinaryLineIsSorted) {
  const Corpus c = parse("b\t3 1 2\n", MeasureMode::kJaccard);
  ASSERT_EQ(c.size(), 1U);
  ASSERT_EQ(c[0].size(), 3U);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(c[0].entries[i].feature, i + 1);
    EXPECT_EQ(c[0].entries[i].weight, 1.0);
  }
}

TEST(Corpus, EmptyInputGivesEmptyCorpus) {
  EXPECT_TRUE(parse("", MeasureMode::kCosineWeighted).empty());
  EXPECT_TRUE(parse("# only a comment\n\n", MeasureMode::kJaccard).empty());
}

TEST(Corpus, CosineBinaryStoresNormalizedWeights) {
  const Corpus c = parse("x\t1 2 3 4\n", MeasureMode::kCosineBinary);
  for (const auto& e : c[0].entries) EXPECT_DOUBLE_EQ(e.weight, 0.5);
}

TEST(Corpus, ParseErrorsCarryLineNumbers) {
  try {
    parse("a\t1:1\nb\t2:1 2:3\n", MeasureMode::kCosineWeighted);
    FAIL() << "duplicate feature accepted";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2U);
  }
  EXPECT_THROW(parse("a\t1:1\na\t2:1\n", MeasureMode::kCosineWeighted), ParseError);
  EXPECT_THROW(parse("no tab here\n", MeasureMode::kCosineWeighted), ParseError);
  EXPECT_THROW(parse("a\t1:abc\n", MeasureMode::kCosineWeighted), ParseError);
  EXPECT_THROW(parse("a\t1:-2\n", MeasureMode::kCosineWeighted), ParseError);
  EXPECT_THROW(parse("a\t1:2\n", MeasureMode::kJaccard), ParseError);
}

TEST(Corpus, DuplicateIdsRejectedAtConstruction) {
  std::vector<SparseVector> v = {{"a", {{1, 1.0}}}, {"a", {{2, 1.0}}}};
  EXPECT_THROW(Corpus(v, MeasureMode::kJaccard), ContractViolation);
}

TEST(Corpus, UnsortedEntriesRejected) {
  std::vector<SparseVector> v = {{"a", {{2, 1.0}, {1, 1.0}}}};
  EXPECT_THROW(Corpus(v, MeasureMode::kJaccard), ContractViolation);
}

TEST(Corpus, NonUnitWeightsRejectedInBinaryModes) {
  std::vector<SparseVector> v = {{"a", {{1, 2.0}}}};
  EXPECT_THROW(Corpus(v, MeasureMode::kJaccard), ContractViolation);
}

TEST(TfIdf, FeatureInEveryVectorIsDropped) {
  std::vector<SparseVector> raw = {{"a", {{1, 1.0}, {2, 1.0}}}, {"b", {{1, 3.0}}}};
  const auto w = tfidf_weight(raw);
  ASSERT_EQ(w[0].size(), 1U);
  EXPECT_EQ(w[0].entries[0].feature, 2U);
  EXPECT_TRUE(w[1].empty());
}

TEST(TfIdf, WeightFormula) {
  std::vector<SparseVector> raw = {
      {"a", {{1, 2.0}, {9, 1.0}}}, {"b", {{9, 1.0}}}, {"c", {{9, 1.0}}}, {"d", {{7, 1.0}}}};
  const auto w = tfidf_weight(raw);
  ASSERT_EQ(w[0].size(), 2U);
  EXPECT_NEAR(w[0].entries[0].weight, 2.0 * std::log(4.0), 1e-12);
  EXPECT_NEAR(w[0].entries[1].weight, std::log(4.0 / 3.0), 1e-12);
}

TEST(TfIdf, SingleVectorCorpusBecomesEmpty) {
  std::vector<SparseVector> raw = {{"a", {{1, 2.0}, {2, 5.0}}}};
  const auto w = tfidf_weight(raw);
  EXPECT_TRUE(w[0].empty());
  const Corpus c(w, MeasureMode::kCosineWeighted);
  EXPECT_EQ(c.num_empty(), 1U);
}

TEST(TfIdf, LoaderAppliesWeightingBeforeNormalization) {
  const Corpus c = parse("a\t1:2 2:1\nb\t2:1\nc\t3:1\nd\t3:1\n", MeasureMode::kCosineWeighted,
                         Weighting::kTfIdf);
  const double w1 = 2.0 * std::log(4.0);
  const double w2 = std::log(2.0);
  const double norm = std::hypot(w1, w2);
  EXPECT_NEAR(c[0].entries[0].weight, w1 / norm, 1e-12);
  EXPECT_NEAR(c[0].entries[1].weight, w2 / norm, 1e-12);
  EXPECT_THROW(parse("a\t1 2\n", MeasureMode::kJaccard, Weighting::kTfIdf), UsageError);
}

TEST(Exact, CosineExamples) {
  const SparseVector x{"x", {{1, 0.6}, {2, 0.8}}};
  const SparseVector y{"y", {{2, 0.8}, {3, 0.6}}};
  const SparseVector z{"z", {{5, 1.0}}};
  EXPECT_NEAR(cosine_exact(x, x), 1.0, 1e-15);
  EXPECT_NEAR(cosine_exact(x, y), 0.64, 1e-15);
  EXPECT_EQ(cosine_exact(x, z), 0.0);
  const SparseVector bad{"b", {{1, 2.0}}};
  EXPECT_THROW(cosine_exact(x, bad), ContractViolation);
}

TEST(Exact, JaccardExamples) {
  const SparseVector a{"a", {{1, 1}, {2, 1}, {3, 1}}};
  const SparseVector b{"b", {{2, 1}, {3, 1}, {4, 1}}};
  const SparseVector d{"d", {{7, 1}, {8, 1}}};
  EXPECT_DOUBLE_EQ(jaccard_exact(a, b), 0.5);
  EXPECT_DOUBLE_EQ(jaccard_exact(a, a), 1.0);
  EXPECT_DOUBLE_EQ(jaccard_exact(a, d), 0.0);
  EXPECT_DOUBLE_EQ(jaccard_exact(SparseVector{}, SparseVector{}), 0.0);
  const SparseVector w{"w", {{1, 0.5}}};
  EXPECT_THROW(jaccard_exact(a, w), ContractViolation);
}

SparseVector random_vector(std::mt19937_64& rng, const std::string& id, bool binary) {
  std::uniform_int_distribution<std::uint32_t> feat(0, 30);
  std::uniform_real_distribution<double> weight(0.1, 3.0);
  std::map<std::uint32_t, double> m;
  const int size = 1 + static_cast<int>(rng() % 12);
  for (int i = 0; i < size; ++i) m[feat(rng)] = binary ? 1.0 : weight(rng);
  SparseVector v{id, {}};
  for (auto [f, w] : m) v.entries.push_back({f, w});
  return v;
}

TEST(ExactProperty, MergeDotMatchesDenseAndIsSymmetric) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<SparseVector> raw = {random_vector(rng, "x", false), random_vector(rng, "y", false)};
    const Corpus c(raw, MeasureMode::kCosineWeighted);
    EXPECT_NEAR(sparse_dot(c[0], c[1]), oracle::dense_dot(c[0], c[1]), 1e-12);
    EXPECT_EQ(cosine_exact(c[0], c[1]), cosine_exact(c[1], c[0]));
    EXPECT_NEAR(cosine_exact(c[0], c[0]), 1.0, 1e-12);
  }
}

TEST(ExactProperty, JaccardMatchesSetOracleAndIsSymmetric) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    const auto x = random_vector(rng, "x", true);
    const auto y = random_vector(rng, "y", true);
    EXPECT_DOUBLE_EQ(jaccard_exact(x, y), oracle::set_jaccard(x, y));
    EXPECT_EQ(jaccard_exact(x, y), jaccard_exact(y, x));
    EXPECT_EQ(jaccard_exact(x, x), 1.0);
  }
}

TEST(CorpusProperty, SerializeRoundTrip) {
  std::mt19937_64 rng(13);
  for (const auto mode :
       {MeasureMode::kCosineWeighted, MeasureMode::kCosineBinary, MeasureMode::kJaccard}) {
    std::vector<SparseVector> raw;
    for (int i = 0; i < 50; ++i) {
      raw.push_back(random_vector(rng, "v" + std::to_string(i), is_binary(mode)));
    }
    if (mode == MeasureMode::kCosineBinary) {
      for (auto& v : raw)
        for (auto& e : v.entries) e.weight = 1.0;
    }
    const Corpus c(raw, mode);
    std::ostringstream out;
    write_corpus(out, c);
    const Corpus back = parse(out.str(), mode);
    EXPECT_EQ(back, c) << to_string(mode);
  }
}

TEST(CorpusProperty, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "bayeslsh_corpus_rt.txt";
  SyntheticSpec spec;
  spec.n = 40;
  spec.seed = 3;
  spec.planted = {{3, 0.8}};
  const Corpus c = generate_synthetic(spec);
  save_corpus(path, c);
  EXPECT_EQ(load_corpus(path, MeasureMode::kCosineWeighted), c);
  std::filesystem::remove(path);
  EXPECT_THROW(load_corpus(path, MeasureMode::kCosineWeighted), IoError);
}

std::vector<double> planted_similarities(const Corpus& c, double target) {
  std::vector<double> out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = i + 1; j < c.size(); ++j) {
      const double s = exact_similarity(c, i, j);
      if (std::abs(s - target) <= 0.02) out.push_back(s);
    }
  }
  return out;
}

TEST(Synthetic, PlantedCosinePairsLandNearTarget) {
  SyntheticSpec spec;
  spec.n = 60;
  spec.planted = {{10, 0.9}};
  spec.seed = 5;
  const Corpus c = generate_synthetic(spec);
  EXPECT_EQ(c.size(), 60U);
  EXPECT_GE(planted_similarities(c, 0.9).size(), 10U);
}

TEST(Synthetic, PlantedJaccardAndBinaryPairs) {
  for (const auto mode : {MeasureMode::kJaccard, MeasureMode::kCosineBinary}) {
    SyntheticSpec spec;
    spec.n = 80;
    spec.planted = {{8, 0.5}, {8, 0.8}};
    spec.seed = 6;
    spec.mode = mode;
    const Corpus c = generate_synthetic(spec);
    EXPECT_GE(planted_similarities(c, 0.5).size(), 8U) << to_string(mode);
    EXPECT_GE(planted_similarities(c, 0.8).size(), 8U) << to_string(mode);
  }
}

TEST(Synthetic, TwoBackgroundVectorsAreDissimilar) {
  SyntheticSpec spec;
  spec.n = 2;
  spec.seed = 9;
  const Corpus c = generate_synthetic(spec);
  EXPECT_LT(cosine_exact(c[0], c[1]), 0.3);
}

TEST(Synthetic, DeterministicUnderSeed) {
  SyntheticSpec spec;
  spec.n = 100;
  spec.planted = {{5, 0.7}};
  spec.seed = 21;
  std::ostringstream a;
  std::ostringstream b;
  write_corpus(a, generate_synthetic(spec));
  write_corpus(b, generate_synthetic(spec));
  EXPECT_EQ(a.str(), b.str());
  spec.seed = 22;
  std::ostringstream c;
  write_corpus(c, generate_synthetic(spec));
  EXPECT_NE(a.str(), c.str());
}

TEST(Synthetic, InfeasibleRequestsFail) {
  SyntheticSpec spec;
  spec.n = 4;
  spec.planted = {{5, 0.7}};
  EXPECT_THROW(generate_synthetic(spec), Error);
  spec.n = 10;
  spec.planted = {{1, 1.5}};
  EXPECT_THROW(generate_synthetic(spec), Error);
}

TEST(Threshold, OpenUnitInterval) {
  EXPECT_NO_THROW(SimilarityThreshold(0.5));
  EXPECT_THROW(SimilarityThreshold(0.0), UsageError);
  EXPECT_THROW(SimilarityThreshold(1.0), UsageError);
}

}  // namespace
}  // namespace bayeslsh
