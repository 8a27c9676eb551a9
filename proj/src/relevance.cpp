#include "zsvqa/relevance.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "zsvqa/errors.hpp"
#include "zsvqa/random.hpp"

namespace zsvqa {

Matrix::Matrix(std::size_t r, std::size_t c, std::vector<double> v)
    : rows(r), cols(c), values(std::move(v)) {
  if (values.size() != rows * cols) {
    throw ShapeError("matrix data has " + std::to_string(values.size()) + " values, expected " +
                     std::to_string(rows * cols));
  }
}

std::string_view to_string(ClampMode mode) {
  switch (mode) {
    case ClampMode::relu_gradient:
      return "relu_gradient";
    case ClampMode::paper_literal_min:
      return "paper_literal_min";
  }
  return "relu_gradient";
}

ClampMode clamp_mode_from_string(std::string_view name) {
  if (name == "relu_gradient") return ClampMode::relu_gradient;
  if (name == "paper_literal_min") return ClampMode::paper_literal_min;
  throw ArgumentError("unknown clamp mode '" + std::string(name) + "'");
}

namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw NumericError(std::string(what) + " contains a non-finite value");
  }
}

std::string shape_str(const HeadTokenPatchTensor& t) {
  return "[" + std::to_string(t.heads) + "x" + std::to_string(t.tokens) + "x" +
         std::to_string(t.patches) + "]";
}

}  // namespace

void validate_attention_bundle(const AttentionBundle& bundle) {
  const auto& attn = bundle.attention;
  const auto& grad = bundle.gradient;
  if (attn.values.size() != attn.heads * attn.tokens * attn.patches ||
      grad.values.size() != grad.heads * grad.tokens * grad.patches) {
    throw ShapeError("attention bundle storage does not match its declared shape");
  }
  if (!attn.same_shape(grad)) {
    throw ShapeError("attention " + shape_str(attn) + " and gradient " + shape_str(grad) +
                     " shapes differ");
  }
  if (attn.heads == 0 || attn.tokens == 0 || attn.patches == 0) {
    throw ShapeError("attention bundle has an empty dimension " + shape_str(attn));
  }
  require_finite(attn.values, "attention");
  require_finite(grad.values, "gradient");
  for (std::size_t h = 0; h < attn.heads; ++h) {
    for (std::size_t l = 0; l < attn.tokens; ++l) {
      double sum = 0.0;
      for (std::size_t k = 0; k < attn.patches; ++k) {
        const double a = attn(h, l, k);
        if (a < 0.0 || a > 1.0) throw NumericError("attention value outside [0, 1]");
        sum += a;
      }
      if (std::abs(sum - 1.0) > kSoftmaxRowTolerance) {
        throw NumericError("attention row (head " + std::to_string(h) + ", token " +
                           std::to_string(l) + ") sums to " + std::to_string(sum));
      }
    }
  }
}

void softmax_rows(Matrix& logits) {
  require_finite(logits.values, "logits");
  for (std::size_t r = 0; r < logits.rows; ++r) {
    double* row = logits.values.data() + r * logits.cols;
    const double peak = *std::max_element(row, row + logits.cols);
    double total = 0.0;
    for (std::size_t c = 0; c < logits.cols; ++c) {
      row[c] = std::exp(row[c] - peak);
      total += row[c];
    }
    for (std::size_t c = 0; c < logits.cols; ++c) row[c] /= total;
  }
}

namespace {

Matrix multiply(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t p = 0; p < a.cols; ++p) {
      const double av = a(i, p);
      if (av == 0.0) continue;
      for (std::size_t j = 0; j < b.cols; ++j) out(i, j) += av * b(p, j);
    }
  }
  return out;
}

Matrix multiply_transposed(const Matrix& a, const Matrix& b) {
  // a * b^T
  Matrix out(a.rows, b.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < b.rows; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < a.cols; ++p) acc += a(i, p) * b(j, p);
      out(i, j) = acc;
    }
  }
  return out;
}

}  // namespace

Matrix cross_attention(const Matrix& query_features, const Matrix& key_features,
                       const Matrix& query_proj, const Matrix& key_proj) {
  const std::size_t dq = query_features.cols;
  if (dq == 0) throw ShapeError("query feature dimension must be positive");
  if (key_features.rows == 0) throw ShapeError("no image patches");
  if (query_proj.rows != dq || query_proj.cols != dq) {
    throw ShapeError("query projection must be [Dq x Dq]");
  }
  if (key_proj.rows != key_features.cols || key_proj.cols != dq) {
    throw ShapeError("key projection must be [Dv x Dq]");
  }
  require_finite(query_features.values, "query features");
  require_finite(key_features.values, "key features");
  require_finite(query_proj.values, "query projection");
  require_finite(key_proj.values, "key projection");

  const Matrix queries = multiply(query_features, query_proj);  // [L x Dq]
  const Matrix keys = multiply(key_features, key_proj);          // [K x Dq]
  Matrix logits = multiply_transposed(queries, keys);            // [L x K]
  const double scale = 1.0 / std::sqrt(static_cast<double>(dq));
  for (double& v : logits.values) v *= scale;
  softmax_rows(logits);
  return logits;
}

PatchRelevanceMap patch_relevance(const AttentionBundle& bundle, ClampMode mode) {
  validate_attention_bundle(bundle);
  const auto& attn = bundle.attention;
  const auto& grad = bundle.gradient;

  PatchRelevanceMap out;
  out.clamp_mode = mode;
  out.scores.assign(attn.patches, 0.0);
  for (std::size_t h = 0; h < attn.heads; ++h) {
    for (std::size_t l = 0; l < attn.tokens; ++l) {
      for (std::size_t k = 0; k < attn.patches; ++k) {
        const double g = grad(h, l, k);
        const double clamped = mode == ClampMode::relu_gradient ? std::max(0.0, g) : std::min(0.0, g);
        out.scores[k] += clamped * attn(h, l, k);
      }
    }
  }
  const double inv_heads = 1.0 / static_cast<double>(attn.heads);
  for (double& s : out.scores) s *= inv_heads;
  return out;
}

std::vector<std::size_t> sample_patches(const PatchRelevanceMap& relevance, std::size_t count,
                                        std::uint64_t seed) {
  const std::size_t n = relevance.scores.size();
  if (count == 0) throw ArgumentError("patch sample count must be at least 1");
  if (count > n) {
    throw ArgumentError("cannot sample " + std::to_string(count) + " patches from " +
                        std::to_string(n));
  }
  require_finite(relevance.scores, "relevance");
  for (double s : relevance.scores) {
    if (s < 0.0) {
      throw ModeError("relevance has negative scores (clamp mode " +
                      std::string(to_string(relevance.clamp_mode)) +
                      "); proportional sampling needs relu_gradient relevance");
    }
  }

  Rng rng(seed);
  std::vector<double> weights = relevance.scores;
  std::vector<bool> taken(n, false);
  std::vector<std::size_t> picked;
  picked.reserve(count);
  while (picked.size() < count) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!taken[i]) total += weights[i];
    }
    std::size_t choice = n;
    if (total > 0.0) {
      const double target = rng.uniform01() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (taken[i] || weights[i] <= 0.0) continue;
        acc += weights[i];
        choice = i;
        if (target < acc) break;
      }
    } else {
      std::size_t nth = rng.below(n - picked.size());
      for (std::size_t i = 0; i < n; ++i) {
        if (taken[i]) continue;
        if (nth == 0) {
          choice = i;
          break;
        }
        --nth;
      }
    }
    taken[choice] = true;
    picked.push_back(choice);
  }
  return picked;
}

}  // namespace zsvqa
