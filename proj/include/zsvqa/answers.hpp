#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "zsvqa/adapters.hpp"
#include "zsvqa/captioner.hpp"

namespace zsvqa {

struct AnswerCandidate {
  std::string text;  // surface form from the first caption it was parsed from
  std::string key;   // normalized form used for counting and matching
  PosClass pos_class = PosClass::noun;
  std::size_t frequency = 0;                    // number of captions containing it
  std::vector<std::size_t> source_caption_ids;  // ascending caption indices
  std::size_t surface_caption_id = 0;           // caption `text` was taken from
};

// One candidate per distinct normalized phrase, in order of first appearance.
// Frequency counts captions that contain the phrase on word boundaries.
std::vector<AnswerCandidate> extract_candidates(const std::vector<Caption>& captions,
                                                const SyntacticParser& parser);

inline std::vector<AnswerCandidate> extract_candidates(const CaptionSet& set,
                                                       const SyntacticParser& parser) {
  return extract_candidates(set.captions, parser);
}

enum class FrequencyOrder { max_first, min_first };

// Stable sort by frequency; equal frequencies ordered by key, then text.
std::vector<AnswerCandidate> rank_by_frequency(std::vector<AnswerCandidate> candidates,
                                               FrequencyOrder order);

}  // namespace zsvqa
