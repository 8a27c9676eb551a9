#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "zsvqa/adapters.hpp"
#include "zsvqa/relevance.hpp"

namespace zsvqa {

struct Caption {
  std::string text;
  double match_score = 0.0;
  std::uint64_t source_seed = 0;
  std::vector<std::size_t> patch_indices;  // the subset it was decoded from; empty = whole image
};

struct CaptionSet {
  std::vector<Caption> captions;
  std::size_t target_size = 0;
  std::size_t dropped_by_filter = 0;
  bool all_filtered = false;  // every caption fell below the threshold
};

struct CaptionBatch {
  std::vector<Caption> captions;
  std::vector<std::size_t> gaps;  // decode indices that stayed empty after retries
};

inline constexpr std::size_t kDecodeRetries = 3;

// Strips an echoed "a picture of" prefix and surrounding whitespace.
std::string tidy_caption(std::string_view decoded);

// `count` decodes over one shared patch subset. Decode i uses a seed derived
// from (seed, i); an empty decode is retried up to kDecodeRetries times.
CaptionBatch generate_captions(const Image& image, std::span<const std::size_t> patch_indices,
                               const CaptionDecoderBackend& decoder, std::size_t count,
                               std::size_t top_k, std::uint64_t seed);

enum class PatchDraw {
  per_caption,  // fresh relevance-proportional subset for every decode
  shared,       // one subset for all decodes
};

std::string_view to_string(PatchDraw mode);
PatchDraw patch_draw_from_string(std::string_view name);

struct QuestionRelevantCaptionOptions {
  std::size_t patch_count = 20;
  std::size_t caption_count = 100;
  std::size_t top_k = 50;
  PatchDraw patch_draw = PatchDraw::per_caption;
};

// Decodes captions from patches drawn proportionally to `relevance`. When the
// image has fewer patches than requested, all of them are used.
CaptionBatch generate_question_relevant_captions(const Image& image,
                                                 const PatchRelevanceMap& relevance,
                                                 const CaptionDecoderBackend& decoder,
                                                 const QuestionRelevantCaptionOptions& options,
                                                 std::uint64_t seed);

// Removes every caption whose text is an exact substring of another
// surviving caption; identical texts keep their first occurrence.
std::vector<Caption> dedup_substrings(std::vector<Caption> captions);

// Scores each caption against its own patch subset and keeps those with
// score >= threshold.
CaptionSet filter_by_match(std::vector<Caption> captions, const MatcherBackend& matcher,
                           const Image& image, double threshold);

// Same, but every caption is scored against `patch_indices`.
CaptionSet filter_by_match(std::vector<Caption> captions, const MatcherBackend& matcher,
                           const Image& image, std::span<const std::size_t> patch_indices,
                           double threshold);

// Guarantees a non-empty set: an empty one gets a single whole-image caption.
// Returns true when the fallback was used.
bool ensure_nonempty(CaptionSet& set, const Image& image, const CaptionDecoderBackend& decoder,
                     const MatcherBackend& matcher, std::size_t top_k, std::uint64_t seed);

}  // namespace zsvqa
