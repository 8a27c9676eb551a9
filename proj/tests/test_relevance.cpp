#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "zsvqa/errors.hpp"
#include "zsvqa/random.hpp"
#include "zsvqa/relevance.hpp"

using namespace zsvqa;

namespace {

AttentionBundle bundle_1x1(std::vector<double> attn, std::vector<double> grad) {
  AttentionBundle b;
  const std::size_t k = attn.size();
  b.attention = HeadTokenPatchTensor(1, 1, k);
  b.gradient = HeadTokenPatchTensor(1, 1, k);
  b.attention.values = std::move(attn);
  b.gradient.values = std::move(grad);
  return b;
}

}  // namespace

TEST(Softmax, LogThreeAndZero) {
  Matrix m(1, 2, {std::log(3.0), 0.0});
  softmax_rows(m);
  EXPECT_NEAR(m(0, 0), 0.75, 1e-12);
  EXPECT_NEAR(m(0, 1), 0.25, 1e-12);
}

TEST(Softmax, LargeLogitsStayFinite) {
  Matrix m(2, 3, {1000.0, 999.0, -1000.0, -5e3, -5e3, -5e3});
  softmax_rows(m);
  for (double v : m.values) EXPECT_TRUE(std::isfinite(v));
  EXPECT_NEAR(m(1, 0), 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(m(0, 0) + m(0, 1) + m(0, 2), 1.0, 1e-12);
}

TEST(Matrix, SizeMismatchIsShapeError) {
  EXPECT_THROW(Matrix(2, 2, std::vector<double>{1.0, 2.0, 3.0}), ShapeError);
}

TEST(CrossAttention, IdentityProjectionsMatchManualComputation) {
  const Matrix q(1, 2, {1.0, 0.0});
  const Matrix keys(2, 2, {2.0, 0.0, 0.0, 2.0});
  const Matrix eye(2, 2, {1.0, 0.0, 0.0, 1.0});
  const Matrix w = cross_attention(q, keys, eye, eye);
  ASSERT_EQ(w.rows, 1u);
  ASSERT_EQ(w.cols, 2u);
  const double a = std::exp(2.0 / std::sqrt(2.0));
  EXPECT_NEAR(w(0, 0), a / (a + 1.0), 1e-12);
  EXPECT_NEAR(w(0, 1), 1.0 / (a + 1.0), 1e-12);
}

TEST(CrossAttention, IncompatibleShapesThrow) {
  const Matrix q(1, 3, 1.0);
  const Matrix keys(2, 2, 1.0);
  const Matrix eye(2, 2, {1.0, 0.0, 0.0, 1.0});
  EXPECT_THROW(cross_attention(q, keys, eye, eye), ShapeError);
}

TEST(PatchRelevance, SingleHeadRelu) {
  const auto r = patch_relevance(bundle_1x1({0.3, 0.7}, {2.0, -1.0}));
  ASSERT_EQ(r.scores.size(), 2u);
  EXPECT_NEAR(r.scores[0], 0.6, 1e-12);
  EXPECT_DOUBLE_EQ(r.scores[1], 0.0);
  EXPECT_EQ(r.clamp_mode, ClampMode::relu_gradient);
}

TEST(PatchRelevance, LiteralMinKeepsNegativePart) {
  const auto r = patch_relevance(bundle_1x1({0.3, 0.7}, {2.0, -1.0}), ClampMode::paper_literal_min);
  EXPECT_DOUBLE_EQ(r.scores[0], 0.0);
  EXPECT_NEAR(r.scores[1], -0.7, 1e-12);
}

TEST(PatchRelevance, AveragesOverHeads) {
  AttentionBundle b;
  b.attention = HeadTokenPatchTensor(2, 1, 2, 0.5);
  b.gradient = HeadTokenPatchTensor(2, 1, 2, 1.0);
  const auto r = patch_relevance(b);
  EXPECT_NEAR(r.scores[0], 0.5, 1e-12);
  EXPECT_NEAR(r.scores[1], 0.5, 1e-12);
}

TEST(PatchRelevance, ShapeMismatchThrows) {
  AttentionBundle b;
  b.attention = HeadTokenPatchTensor(1, 1, 2, 0.5);
  b.gradient = HeadTokenPatchTensor(1, 1, 3, 1.0);
  EXPECT_THROW(patch_relevance(b), ShapeError);
}

TEST(PatchRelevance, NonFiniteGradientThrows) {
  auto b = bundle_1x1({0.5, 0.5}, {std::numeric_limits<double>::quiet_NaN(), 1.0});
  EXPECT_THROW(patch_relevance(b), NumericError);
}

TEST(PatchRelevance, RowsMustSumToOne) {
  auto b = bundle_1x1({0.5, 0.4}, {1.0, 1.0});
  EXPECT_THROW(patch_relevance(b), NumericError);
}

TEST(ClampMode, RoundTrip) {
  for (auto m : {ClampMode::relu_gradient, ClampMode::paper_literal_min}) {
    EXPECT_EQ(clamp_mode_from_string(to_string(m)), m);
  }
  EXPECT_THROW(clamp_mode_from_string("abs"), ArgumentError);
}

TEST(SamplePatches, CountBounds) {
  PatchRelevanceMap r{{1.0, 2.0, 3.0}, ClampMode::relu_gradient};
  EXPECT_THROW(sample_patches(r, 4, 1), ArgumentError);
  EXPECT_THROW(sample_patches(r, 0, 1), ArgumentError);
  const auto all = sample_patches(r, 3, 1);
  EXPECT_EQ(std::set<std::size_t>(all.begin(), all.end()), (std::set<std::size_t>{0, 1, 2}));
}

TEST(SamplePatches, NegativeScoresAreModeError) {
  PatchRelevanceMap r{{0.0, -0.7}, ClampMode::paper_literal_min};
  EXPECT_THROW(sample_patches(r, 1, 1), ModeError);
}

TEST(SamplePatches, ZeroMassFallsBackToUniform) {
  PatchRelevanceMap r{{0.0, 0.0, 0.0, 0.0}, ClampMode::relu_gradient};
  std::map<std::size_t, int> hits;
  for (std::uint64_t s = 0; s < 4000; ++s) hits[sample_patches(r, 1, s)[0]]++;
  ASSERT_EQ(hits.size(), 4u);
  for (const auto& [k, n] : hits) EXPECT_NEAR(n / 4000.0, 0.25, 0.03) << "patch " << k;
}

TEST(SamplePatches, ZeroScorePatchesOnlyAfterPositiveOnes) {
  PatchRelevanceMap r{{0.0, 5.0, 0.0, 1.0}, ClampMode::relu_gradient};
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto picks = sample_patches(r, 3, s);
    EXPECT_EQ(std::set<std::size_t>(picks.begin(), picks.begin() + 2), (std::set<std::size_t>{1, 3}));
  }
}

TEST(SamplePatches, ThreeToOneFrequency) {
  PatchRelevanceMap r{{3.0, 1.0}, ClampMode::relu_gradient};
  int first = 0;
  const int n = 20000;
  for (int s = 0; s < n; ++s) first += sample_patches(r, 1, static_cast<std::uint64_t>(s))[0] == 0;
  EXPECT_NEAR(first / static_cast<double>(n), 0.75, 0.02);
}

TEST(SamplePatches, DeterministicPerSeed) {
  PatchRelevanceMap r{{0.1, 0.4, 0.2, 0.3, 0.9}, ClampMode::relu_gradient};
  EXPECT_EQ(sample_patches(r, 3, 42), sample_patches(r, 3, 42));
}

TEST(Random, BelowStaysInRange) {
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(rng.below(13), 13u);
}

TEST(Random, ChooseIsDistinct) {
  Rng rng(9);
  const auto c = rng.choose(20, 10);
  EXPECT_EQ(std::set<std::size_t>(c.begin(), c.end()).size(), 10u);
}

TEST(Random, DerivedSeedsDiffer) {
  EXPECT_NE(derive_seed(1, "a"), derive_seed(1, "b"));
  EXPECT_NE(derive_seed(1, std::uint64_t{0}), derive_seed(1, std::uint64_t{1}));
}
