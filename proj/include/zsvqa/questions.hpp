#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zsvqa/adapters.hpp"
#include "zsvqa/answers.hpp"

namespace zsvqa {

enum class QuestionGenerator { template_based, neural, agnostic };

std::string_view to_string(QuestionGenerator g);
QuestionGenerator question_generator_from_string(std::string_view name);

struct ExemplarQA {
  std::string question;
  std::string answer;
  std::string source_image_id;
  std::optional<std::size_t> source_caption_id;
  QuestionGenerator generator = QuestionGenerator::template_based;
  std::string note;  // diagnostic, e.g. a neural fallback
};

// Question templates for one part-of-speech class, in table order.
std::span<const std::string_view> question_templates(PosClass pos);

// Draws a template for the candidate's class uniformly with the given seed.
// Throws ClassificationError for a class without templates.
ExemplarQA template_question(const AnswerCandidate& candidate, std::uint64_t seed);

// Ensures a generated question ends in exactly one '?'.
std::string terminate_question(std::string_view generated);

// Asks the generator for a question about `candidate` given the caption it
// came from. An empty generation falls back to template_question and says so
// in `note`.
ExemplarQA neural_question(const AnswerCandidate& candidate, std::string_view context_caption,
                           const QuestionGeneratorBackend& generator, std::uint64_t fallback_seed);

// Seeded uniform sample, without replacement, of exemplars built for other
// images. Every returned pair is marked agnostic.
std::vector<ExemplarQA> agnostic_exemplars(std::span<const ExemplarQA> pool, std::size_t count,
                                           std::uint64_t seed);

}  // namespace zsvqa
