#include "zsvqa/captioner.hpp"

#include <cctype>
#include <algorithm>
#include <cmath>
#include <exception>
#include <string>

#include "zsvqa/errors.hpp"
#include "zsvqa/random.hpp"
#include "zsvqa/text.hpp"

namespace zsvqa {

std::string_view to_string(PatchDraw mode) {
  return mode == PatchDraw::shared ? "shared" : "per_caption";
}

PatchDraw patch_draw_from_string(std::string_view name) {
  if (name == "per_caption") return PatchDraw::per_caption;
  if (name == "shared") return PatchDraw::shared;
  throw ArgumentError("unknown patch draw mode '" + std::string(name) + "'");
}

std::string tidy_caption(std::string_view decoded) {
  std::string s = text::trim(decoded);
  if (text::starts_with_ci(s, kCaptionPrompt)) {
    const std::size_t n = kCaptionPrompt.size();
    // only a whole-word prefix
    if (s.size() == n || !std::isalnum(static_cast<unsigned char>(s[n]))) {
      s = text::trim(std::string_view(s).substr(n));
      if (!s.empty() && (s.front() == ',' || s.front() == ':')) s = text::trim(std::string_view(s).substr(1));
    }
  }
  return s;
}

namespace {

std::string decode_one(const Image& image, std::span<const std::size_t> patches,
                       const CaptionDecoderBackend& decoder, std::size_t top_k, std::uint64_t seed,
                       std::size_t caption_index) {
  try {
    return tidy_caption(decoder.decode(image, patches, kCaptionPrompt, top_k, seed));
  } catch (const BackendError&) {
    throw;
  } catch (const std::exception& e) {
    throw BackendError("caption decoder failed on caption " + std::to_string(caption_index) +
                       ": " + e.what());
  }
}

// Decode with bounded retries. Returns false when every attempt was empty.
bool decode_with_retries(const Image& image, std::span<const std::size_t> patches,
                         const CaptionDecoderBackend& decoder, std::size_t top_k,
                         std::uint64_t seed, std::size_t index, Caption& out) {
  std::uint64_t attempt_seed = seed;
  for (std::size_t attempt = 0; attempt <= kDecodeRetries; ++attempt) {
    std::string text = decode_one(image, patches, decoder, top_k, attempt_seed, index);
    if (!text.empty()) {
      out.text = std::move(text);
      out.source_seed = attempt_seed;
      out.patch_indices.assign(patches.begin(), patches.end());
      return true;
    }
    attempt_seed = derive_seed(attempt_seed, "retry");
  }
  return false;
}

}  // namespace

CaptionBatch generate_captions(const Image& image, std::span<const std::size_t> patch_indices,
                               const CaptionDecoderBackend& decoder, std::size_t count,
                               std::size_t top_k, std::uint64_t seed) {
  if (count == 0) throw ArgumentError("caption count must be at least 1");
  CaptionBatch batch;
  batch.captions.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Caption c;
    if (decode_with_retries(image, patch_indices, decoder, top_k, derive_seed(seed, i), i, c)) {
      batch.captions.push_back(std::move(c));
    } else {
      batch.gaps.push_back(i);
    }
  }
  return batch;
}

CaptionBatch generate_question_relevant_captions(const Image& image,
                                                 const PatchRelevanceMap& relevance,
                                                 const CaptionDecoderBackend& decoder,
                                                 const QuestionRelevantCaptionOptions& options,
                                                 std::uint64_t seed) {
  if (options.caption_count == 0) throw ArgumentError("caption count must be at least 1");
  const std::size_t draw = std::min(options.patch_count, relevance.scores.size());
  if (draw == 0) throw ArgumentError("patch count must be at least 1");

  if (options.patch_draw == PatchDraw::shared) {
    auto patches = sample_patches(relevance, draw, derive_seed(seed, "patches"));
    std::sort(patches.begin(), patches.end());
    return generate_captions(image, patches, decoder, options.caption_count, options.top_k,
                             derive_seed(seed, "decode"));
  }

  CaptionBatch batch;
  batch.captions.reserve(options.caption_count);
  for (std::size_t i = 0; i < options.caption_count; ++i) {
    const std::uint64_t caption_seed = derive_seed(seed, i);
    auto patches = sample_patches(relevance, draw, derive_seed(caption_seed, "patches"));
    std::sort(patches.begin(), patches.end());
    Caption c;
    if (decode_with_retries(image, patches, decoder, options.top_k,
                            derive_seed(caption_seed, "decode"), i, c)) {
      batch.captions.push_back(std::move(c));
    } else {
      batch.gaps.push_back(i);
    }
  }
  return batch;
}

std::vector<Caption> dedup_substrings(std::vector<Caption> captions) {
  const std::size_t n = captions.size();
  std::vector<bool> keep(n, true);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string& a = captions[i].text;
    for (std::size_t j = 0; j < n && keep[i]; ++j) {
      if (i == j) continue;
      const std::string& b = captions[j].text;
      if (a == b) {
        if (j < i) keep[i] = false;
      } else if (b.size() > a.size() && b.find(a) != std::string::npos) {
        keep[i] = false;
      }
    }
  }
  std::vector<Caption> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i]) out.push_back(std::move(captions[i]));
  }
  return out;
}

namespace {

double score_caption(const MatcherBackend& matcher, const Image& image,
                     std::span<const std::size_t> patches, const std::string& caption) {
  double s = 0.0;
  try {
    s = matcher.match_score(image, patches, caption);
  } catch (const BackendError&) {
    throw;
  } catch (const std::exception& e) {
    throw BackendError(std::string("matcher failed while scoring a caption: ") + e.what());
  }
  if (!std::isfinite(s)) throw BackendError("matcher returned a non-finite match score");
  if (s < 0.0 || s > 1.0) throw BackendError("matcher returned a match score outside [0, 1]");
  return s;
}

CaptionSet filter_impl(std::vector<Caption> captions, const MatcherBackend& matcher,
                       const Image& image, const std::span<const std::size_t>* shared,
                       double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw ArgumentError("match threshold must lie in [0, 1]");
  }
  CaptionSet set;
  set.target_size = captions.size();
  for (auto& c : captions) {
    std::span<const std::size_t> patches = shared ? *shared : std::span<const std::size_t>(c.patch_indices);
    c.match_score = score_caption(matcher, image, patches, c.text);
    if (c.match_score >= threshold) {
      set.captions.push_back(std::move(c));
    } else {
      ++set.dropped_by_filter;
    }
  }
  set.all_filtered = set.captions.empty() && set.target_size > 0;
  return set;
}

}  // namespace

CaptionSet filter_by_match(std::vector<Caption> captions, const MatcherBackend& matcher,
                           const Image& image, double threshold) {
  return filter_impl(std::move(captions), matcher, image, nullptr, threshold);
}

CaptionSet filter_by_match(std::vector<Caption> captions, const MatcherBackend& matcher,
                           const Image& image, std::span<const std::size_t> patch_indices,
                           double threshold) {
  return filter_impl(std::move(captions), matcher, image, &patch_indices, threshold);
}

bool ensure_nonempty(CaptionSet& set, const Image& image, const CaptionDecoderBackend& decoder,
                     const MatcherBackend& matcher, std::size_t top_k, std::uint64_t seed) {
  if (!set.captions.empty()) return false;
  Caption c;
  const std::uint64_t s = derive_seed(seed, "whole-image");
  if (!decode_with_retries(image, {}, decoder, top_k, s, 0, c)) {
    throw BackendError("caption decoder produced no text for the whole-image fallback caption");
  }
  c.match_score = score_caption(matcher, image, {}, c.text);
  set.captions.push_back(std::move(c));
  return true;
}

}  // namespace zsvqa
