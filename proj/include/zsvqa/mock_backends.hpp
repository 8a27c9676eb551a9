#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zsvqa/adapters.hpp"

namespace zsvqa::mock {

// Synthetic image used by the mock backends. The image payload is a JSON
// document {"patches": [{"object", "attribute", "action", "count"}, ...]}
// laid out as a flat patch grid; every field but "object" is optional.
struct ScenePatch {
  std::string object;
  std::string attribute;
  std::string action;
  int count = 1;
};

struct Scene {
  std::vector<ScenePatch> patches;

  static Scene parse(std::string_view payload);  // throws DataError
  // Lowercased words of a patch (object, attribute, action, count word).
  std::vector<std::string> vocabulary(std::size_t patch) const;
};

// Word-level stem used for all lexical matching in the mocks.
std::string stem(std::string_view word);

// Hashed bag-of-words matcher. Question tokens attend to patches through
// cross_attention over hashed word embeddings; the similarity is linear in
// the attention so its gradient is the centred token/patch overlap.
class SceneMatcher final : public MatcherBackend {
 public:
  static constexpr std::size_t kEmbeddingDim = 64;
  static constexpr int kLayer = 8;

  std::size_t patch_count(const Image& image) const override;
  double match_score(const Image& image, std::span<const std::size_t> patch_indices,
                     std::string_view text) const override;
  AttentionBundle attention_bundle(const Image& image, std::string_view question) const override;
};

// Composes short captions from the objects in the chosen patches, with a
// small chance of hallucinating an object that is not there and a smaller
// chance of an empty decode.
class SceneCaptionDecoder final : public CaptionDecoderBackend {
 public:
  std::string decode(const Image& image, std::span<const std::size_t> patch_indices,
                     std::string_view prompt, std::size_t top_k,
                     std::uint64_t seed) const override;
};

// Cloze-style generator: blanks the answer out of its context caption.
class ClozeQuestionGenerator final : public QuestionGeneratorBackend {
 public:
  std::string generate(std::string_view answer, std::string_view context) const override;
};

// Greedy "reader" over the prompt format: answers with the exemplar whose
// question shares the most stems with the target question, falling back to
// the contexts, then to "yes".
class OverlapCompletion final : public CompletionBackend {
 public:
  std::string complete_greedy(std::string_view prompt, std::size_t max_new_tokens) const override;
  std::size_t token_count(std::string_view text) const override;
  std::string tokenizer_name() const override { return "heuristic-alnum-punct"; }
};

// Returns fixed strings in call order (cycling), for plumbing tests. Not
// meant for concurrent use.
class FixedCaptionDecoder final : public CaptionDecoderBackend {
 public:
  explicit FixedCaptionDecoder(std::vector<std::string> outputs) : outputs_(std::move(outputs)) {}
  std::string decode(const Image& image, std::span<const std::size_t> patch_indices,
                     std::string_view prompt, std::size_t top_k,
                     std::uint64_t seed) const override;

 private:
  std::vector<std::string> outputs_;
  mutable std::atomic<std::size_t> next_{0};
};

}  // namespace zsvqa::mock
