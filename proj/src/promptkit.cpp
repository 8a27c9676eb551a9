#include "zsvqa/promptkit.hpp"

#include <algorithm>
#include <set>

#include "zsvqa/errors.hpp"
#include "zsvqa/random.hpp"
#include "zsvqa/text.hpp"

namespace zsvqa {

std::string_view to_string(PromptLayout layout) {
  return layout == PromptLayout::cqa_interleaved ? "cqa_interleaved" : "ccc_qaqaqa";
}

std::string_view to_string(ExemplarStrategy strategy) {
  return strategy == ExemplarStrategy::random ? "random" : "max_freq";
}

std::string_view to_string(CaptionStrategy strategy) {
  switch (strategy) {
    case CaptionStrategy::min_freq:
      return "min_freq";
    case CaptionStrategy::max_freq:
      return "max_freq";
    case CaptionStrategy::random:
      return "random";
  }
  return "min_freq";
}

PromptLayout prompt_layout_from_string(std::string_view name) {
  if (name == "ccc_qaqaqa") return PromptLayout::ccc_qaqaqa;
  if (name == "cqa_interleaved") return PromptLayout::cqa_interleaved;
  throw ArgumentError("unknown prompt layout '" + std::string(name) + "'");
}

ExemplarStrategy exemplar_strategy_from_string(std::string_view name) {
  if (name == "max_freq") return ExemplarStrategy::max_freq;
  if (name == "random") return ExemplarStrategy::random;
  throw ArgumentError("unknown exemplar strategy '" + std::string(name) + "'");
}

CaptionStrategy caption_strategy_from_string(std::string_view name) {
  if (name == "min_freq") return CaptionStrategy::min_freq;
  if (name == "max_freq") return CaptionStrategy::max_freq;
  if (name == "random") return CaptionStrategy::random;
  throw ArgumentError("unknown caption strategy '" + std::string(name) + "'");
}

std::vector<AnswerCandidate> select_exemplars(const std::vector<AnswerCandidate>& candidates,
                                              ExemplarStrategy strategy, std::size_t count,
                                              std::uint64_t seed) {
  auto ranked = rank_by_frequency(candidates, FrequencyOrder::max_first);
  if (strategy == ExemplarStrategy::max_freq) {
    if (ranked.size() > count) ranked.resize(count);
    return ranked;
  }
  Rng rng(seed);
  auto picks = rng.choose(ranked.size(), count);
  std::sort(picks.begin(), picks.end());
  std::vector<AnswerCandidate> out;
  out.reserve(picks.size());
  for (std::size_t i : picks) out.push_back(ranked[i]);
  return out;
}

std::vector<std::size_t> select_captions(const std::vector<Caption>& captions,
                                         const std::vector<AnswerCandidate>& candidates,
                                         CaptionStrategy strategy, std::size_t count,
                                         std::uint64_t seed) {
  std::vector<std::size_t> out;
  if (captions.empty() || count == 0) return out;

  if (strategy == CaptionStrategy::random || candidates.empty()) {
    if (strategy == CaptionStrategy::random) {
      Rng rng(seed);
      out = rng.choose(captions.size(), count);
      std::sort(out.begin(), out.end());
    } else {
      // nothing to rank by: keep caption order
      for (std::size_t i = 0; i < captions.size() && i < count; ++i) out.push_back(i);
    }
    return out;
  }

  const auto order =
      strategy == CaptionStrategy::min_freq ? FrequencyOrder::min_first : FrequencyOrder::max_first;
  auto ranked = rank_by_frequency(candidates, order);
  if (ranked.size() > count) ranked.resize(count);
  std::set<std::size_t> seen;
  for (const auto& c : ranked) {
    if (c.source_caption_ids.empty()) continue;
    const std::size_t id = c.source_caption_ids.front();
    if (id >= captions.size()) {
      throw ArgumentError("answer candidate refers to caption " + std::to_string(id) +
                          " outside the caption set");
    }
    if (seen.insert(id).second) out.push_back(id);
  }
  return out;
}

namespace {

std::string period_terminated(std::string_view caption) {
  std::string s = text::trim(caption);
  while (!s.empty() && (s.back() == '.' || s.back() == ' ')) s.pop_back();
  s.push_back('.');
  return s;
}

void append_block(std::string& out, const std::string& block) {
  if (block.empty()) return;
  if (!out.empty()) out.push_back(' ');
  out += block;
}

}  // namespace

std::string render_contexts(const std::vector<std::string>& captions) {
  if (captions.empty()) return {};
  std::string out = "Contexts:";
  for (const auto& c : captions) {
    out.push_back(' ');
    out += period_terminated(c);
  }
  return out;
}

std::string render_exemplar(const ExemplarQA& qa) {
  return "Question: " + text::trim(qa.question) + " Answer: " + period_terminated(qa.answer);
}

std::string render_exemplar_section(const std::vector<ExemplarQA>& exemplars) {
  std::string out;
  for (const auto& qa : exemplars) append_block(out, render_exemplar(qa));
  return out;
}

std::string render_target(std::string_view question) {
  return "Question: " + text::trim(question) + ". Answer:";
}

std::string render_prompt(std::string_view instruction, const std::vector<std::string>& captions,
                          const std::vector<ExemplarQA>& exemplars, std::string_view target_question,
                          PromptLayout layout) {
  std::string out = text::trim(instruction);
  if (layout == PromptLayout::ccc_qaqaqa) {
    append_block(out, render_contexts(captions));
    append_block(out, render_exemplar_section(exemplars));
  } else {
    const std::size_t n = std::max(captions.size(), exemplars.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (i < captions.size()) append_block(out, render_contexts({captions[i]}));
      if (i < exemplars.size()) append_block(out, render_exemplar(exemplars[i]));
    }
  }
  append_block(out, render_target(target_question));
  return out;
}

PromptBundle assemble_prompt(std::string_view instruction, std::vector<std::string> captions,
                             std::vector<ExemplarQA> exemplars, std::string_view target_question,
                             PromptLayout layout, const TokenCounter& tokenizer,
                             std::size_t budget) {
  if (text::trim(instruction).empty()) throw ArgumentError("prompt instruction is empty");
  if (text::trim(target_question).empty()) throw ArgumentError("target question is empty");

  const std::string skeleton = render_prompt(instruction, {}, {}, target_question, layout);
  const std::size_t floor_tokens = tokenizer.token_count(skeleton);
  if (floor_tokens > budget) {
    throw BudgetError("instruction and target question need " + std::to_string(floor_tokens) +
                          " tokens, budget is " + std::to_string(budget),
                      floor_tokens, budget);
  }

  PromptBundle bundle;
  bundle.instruction = text::trim(instruction);
  bundle.target_question = text::trim(target_question);
  bundle.layout = layout;
  bundle.budget = budget;

  std::string rendered = render_prompt(instruction, captions, exemplars, target_question, layout);
  std::size_t tokens = tokenizer.token_count(rendered);
  while (tokens > budget) {
    if (!exemplars.empty()) {
      exemplars.pop_back();
      ++bundle.trimmed_exemplars;
    } else {
      captions.pop_back();  // non-empty: the skeleton alone fits
      ++bundle.trimmed_captions;
    }
    rendered = render_prompt(instruction, captions, exemplars, target_question, layout);
    tokens = tokenizer.token_count(rendered);
  }

  bundle.context_captions = std::move(captions);
  bundle.exemplars = std::move(exemplars);
  bundle.token_count = tokens;
  bundle.text = std::move(rendered);
  return bundle;
}

}  // namespace zsvqa
