#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "zsvqa/adapters.hpp"
#include "zsvqa/answers.hpp"
#include "zsvqa/captioner.hpp"
#include "zsvqa/questions.hpp"

namespace zsvqa {

inline constexpr std::string_view kInstruction =
    "Please reason the answers of question according to the contexts.";

inline constexpr std::size_t kDefaultTokenBudget = 2048;

enum class PromptLayout {
  ccc_qaqaqa,       // all captions, then all exemplars
  cqa_interleaved,  // caption i followed by exemplar i
};

enum class ExemplarStrategy { max_freq, random };
enum class CaptionStrategy { min_freq, max_freq, random };

std::string_view to_string(PromptLayout layout);
std::string_view to_string(ExemplarStrategy strategy);
std::string_view to_string(CaptionStrategy strategy);
PromptLayout prompt_layout_from_string(std::string_view name);
ExemplarStrategy exemplar_strategy_from_string(std::string_view name);
CaptionStrategy caption_strategy_from_string(std::string_view name);

struct PromptBundle {
  std::string instruction;
  std::vector<std::string> context_captions;
  std::vector<ExemplarQA> exemplars;
  std::string target_question;
  PromptLayout layout = PromptLayout::ccc_qaqaqa;
  std::size_t budget = kDefaultTokenBudget;
  std::size_t token_count = 0;
  std::size_t trimmed_exemplars = 0;
  std::size_t trimmed_captions = 0;
  std::string text;  // the rendered prompt
};

// Up to `count` candidates: the most frequent ones (max_freq) or a seeded
// uniform subset kept in rank order (random).
std::vector<AnswerCandidate> select_exemplars(const std::vector<AnswerCandidate>& candidates,
                                              ExemplarStrategy strategy, std::size_t count,
                                              std::uint64_t seed);

// Caption indices into `captions`. min_freq/max_freq take `count` answers from
// the frequency extreme and the first caption containing each, with repeats
// collapsed; random is a seeded uniform subset in caption order.
std::vector<std::size_t> select_captions(const std::vector<Caption>& captions,
                                         const std::vector<AnswerCandidate>& candidates,
                                         CaptionStrategy strategy, std::size_t count,
                                         std::uint64_t seed);

// "Contexts: a. b." for the given captions ("" when empty).
std::string render_contexts(const std::vector<std::string>& captions);
// "Question: q Answer: a."
std::string render_exemplar(const ExemplarQA& qa);
// All exemplar blocks joined by a space.
std::string render_exemplar_section(const std::vector<ExemplarQA>& exemplars);
// "Question: q. Answer:"
std::string render_target(std::string_view question);

// Renders the prompt without trimming.
std::string render_prompt(std::string_view instruction, const std::vector<std::string>& captions,
                          const std::vector<ExemplarQA>& exemplars, std::string_view target_question,
                          PromptLayout layout);

// Renders and, when over budget, drops exemplars from the tail and then
// captions from the tail until the prompt fits. Throws BudgetError when even
// instruction plus target question exceed the budget.
PromptBundle assemble_prompt(std::string_view instruction, std::vector<std::string> captions,
                             std::vector<ExemplarQA> exemplars, std::string_view target_question,
                             PromptLayout layout, const TokenCounter& tokenizer,
                             std::size_t budget = kDefaultTokenBudget);

}  // namespace zsvqa
