#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "zsvqa/adapters.hpp"
#include "zsvqa/promptkit.hpp"
#include "zsvqa/questions.hpp"

namespace zsvqa {

// Answer normalization of the official VQA evaluator: punctuation handling,
// lowercasing, number words to digits, article removal, contraction repair.
std::string normalize_vqa_answer(std::string_view answer);

// min(#ground truths equal to the prediction / 3, 1) after normalization.
// Throws DataError for an empty ground-truth list.
double vqa_score(std::string_view prediction, const std::vector<std::string>& ground_truths);

// Fraction of exemplars whose normalized answer equals a normalized ground
// truth. nullopt when there are no exemplars.
std::optional<double> answer_hit_rate(const std::vector<ExemplarQA>& exemplars,
                                      const std::vector<std::string>& ground_truths);

// Ground-truth answer occurrences in the exemplar text divided by its token
// count. Each distinct lowercased ground truth is counted on word boundaries.
// nullopt when the exemplar text has no tokens.
std::optional<double> answer_noise_rate(std::string_view exemplar_section,
                                        const std::vector<std::string>& ground_truths,
                                        const TokenCounter& tokenizer);

inline std::optional<double> answer_noise_rate(const PromptBundle& prompt,
                                               const std::vector<std::string>& ground_truths,
                                               const TokenCounter& tokenizer) {
  return answer_noise_rate(render_exemplar_section(prompt.exemplars), ground_truths, tokenizer);
}

// Occurrence count used by answer_noise_rate.
std::size_t ground_truth_occurrences(std::string_view exemplar_section,
                                     const std::vector<std::string>& ground_truths);

}  // namespace zsvqa
