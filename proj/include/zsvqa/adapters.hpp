#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zsvqa/relevance.hpp"

namespace zsvqa {

// An image as handed to the vision backends: an identifier, where it came
// from, and its raw bytes (an encoded picture for real backends, a scene
// description for the mock ones).
struct Image {
  std::string id;
  std::string path;
  std::string payload;
};

// Image-grounded text matcher (similarity head plus its cross-attention).
class MatcherBackend {
 public:
  virtual ~MatcherBackend() = default;

  virtual std::size_t patch_count(const Image& image) const = 0;

  // Match probability in [0, 1] of `text` against the given patches; an empty
  // patch list means the whole image.
  virtual double match_score(const Image& image, std::span<const std::size_t> patch_indices,
                             std::string_view text) const = 0;

  virtual AttentionBundle attention_bundle(const Image& image, std::string_view question) const = 0;
};

class CaptionDecoderBackend {
 public:
  virtual ~CaptionDecoderBackend() = default;

  // One stochastic top-k decode conditioned on the patch subset and the text
  // prompt. Deterministic per seed. An empty patch list means the whole image.
  virtual std::string decode(const Image& image, std::span<const std::size_t> patch_indices,
                             std::string_view prompt, std::size_t top_k,
                             std::uint64_t seed) const = 0;
};

// Greedy "Answer: [answer]. Context: [context]" question generator.
class QuestionGeneratorBackend {
 public:
  virtual ~QuestionGeneratorBackend() = default;
  virtual std::string generate(std::string_view answer, std::string_view context) const = 0;
};

class TokenCounter {
 public:
  virtual ~TokenCounter() = default;
  virtual std::size_t token_count(std::string_view text) const = 0;
  // Recorded in manifests next to token-based metrics.
  virtual std::string tokenizer_name() const = 0;
};

// Alphanumeric runs and single punctuation characters each count as a token.
class HeuristicTokenCounter : public TokenCounter {
 public:
  std::size_t token_count(std::string_view text) const override;
  std::string tokenizer_name() const override { return "heuristic-alnum-punct"; }
};

class CompletionBackend : public TokenCounter {
 public:
  virtual std::string complete_greedy(std::string_view prompt, std::size_t max_new_tokens) const = 0;
};

enum class PosClass { noun, verb, adjective, number, boolean };

std::string_view to_string(PosClass pos);
PosClass pos_class_from_string(std::string_view name);

struct ParsedPhrase {
  std::string text;  // surface form as it appears in the caption
  PosClass pos = PosClass::noun;
};

class SyntacticParser {
 public:
  virtual ~SyntacticParser() = default;
  virtual std::vector<ParsedPhrase> parse(std::string_view sentence) const = 0;
  virtual std::string version() const = 0;
};

// The prompt fed to the caption decoder ahead of its own tokens.
inline constexpr std::string_view kCaptionPrompt = "a picture of";

// Cleans a raw greedy completion into a scoreable answer: cut at the first
// newline or "Question:" continuation, strip surrounding whitespace and
// punctuation, lowercase. An empty result is the empty-answer marker.
std::string clean_answer(std::string_view raw_completion);

}  // namespace zsvqa
