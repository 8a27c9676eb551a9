#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace zsvqa {

// Dense row-major matrix. Used for feature blocks and projection heads.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), values(r * c, fill) {}
  Matrix(std::size_t r, std::size_t c, std::vector<double> v);

  double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {values.data() + r * cols, cols}; }
};

// [heads x text tokens x patches], row-major with patches innermost.
struct HeadTokenPatchTensor {
  std::size_t heads = 0;
  std::size_t tokens = 0;
  std::size_t patches = 0;
  std::vector<double> values;

  HeadTokenPatchTensor() = default;
  HeadTokenPatchTensor(std::size_t h, std::size_t l, std::size_t k, double fill = 0.0)
      : heads(h), tokens(l), patches(k), values(h * l * k, fill) {}

  double& operator()(std::size_t h, std::size_t l, std::size_t k) {
    return values[(h * tokens + l) * patches + k];
  }
  double operator()(std::size_t h, std::size_t l, std::size_t k) const {
    return values[(h * tokens + l) * patches + k];
  }
  bool same_shape(const HeadTokenPatchTensor& other) const {
    return heads == other.heads && tokens == other.tokens && patches == other.patches;
  }
};

// Cross-attention scores of one matcher layer together with the gradient of
// the image-question similarity with respect to those scores.
struct AttentionBundle {
  int layer_index = 0;
  HeadTokenPatchTensor attention;
  HeadTokenPatchTensor gradient;
};

enum class ClampMode {
  relu_gradient,      // max(0, d sim / d W)
  paper_literal_min,  // min(0, d sim / d W)
};

std::string_view to_string(ClampMode mode);
ClampMode clamp_mode_from_string(std::string_view name);

struct PatchRelevanceMap {
  std::vector<double> scores;
  ClampMode clamp_mode = ClampMode::relu_gradient;
};

inline constexpr double kSoftmaxRowTolerance = 1e-5;

// Throws ShapeError / NumericError when the bundle violates its invariants:
// identical shapes, finite values, attention in [0,1] with unit row sums.
void validate_attention_bundle(const AttentionBundle& bundle);

// Numerically stable softmax of every row in place.
void softmax_rows(Matrix& logits);

// softmax(Q Wq Wk^T K^T / sqrt(Dq)); query_features is [L x Dq], key_features
// [K x Dv], query_proj [Dq x Dq], key_proj [Dv x Dq]. Returns [L x K].
Matrix cross_attention(const Matrix& query_features, const Matrix& key_features,
                       const Matrix& query_proj, const Matrix& key_proj);

// r_k = (1/H) sum_l sum_h clamp(grad[h,l,k]) * attn[h,l,k]
PatchRelevanceMap patch_relevance(const AttentionBundle& bundle,
                                  ClampMode mode = ClampMode::relu_gradient);

// Draws `count` distinct patch indices, each draw proportional to the
// remaining scores. All-zero mass falls back to uniform over what is left.
std::vector<std::size_t> sample_patches(const PatchRelevanceMap& relevance, std::size_t count,
                                        std::uint64_t seed);

}  // namespace zsvqa
