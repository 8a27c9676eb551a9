#include "zsvqa/questions.hpp"

#include <array>
#include <exception>

#include "zsvqa/errors.hpp"
#include "zsvqa/random.hpp"
#include "zsvqa/text.hpp"

namespace zsvqa {

std::string_view to_string(QuestionGenerator g) {
  switch (g) {
    case QuestionGenerator::template_based:
      return "template";
    case QuestionGenerator::neural:
      return "neural";
    case QuestionGenerator::agnostic:
      return "agnostic";
  }
  return "template";
}

QuestionGenerator question_generator_from_string(std::string_view name) {
  if (name == "template") return QuestionGenerator::template_based;
  if (name == "neural") return QuestionGenerator::neural;
  if (name == "agnostic") return QuestionGenerator::agnostic;
  throw ArgumentError("unknown question generator '" + std::string(name) + "'");
}

namespace {

constexpr std::array<std::string_view, 2> kNounTemplates = {
    "What item is this in this picture?",
    "What item is that in this picture?",
};

constexpr std::array<std::string_view, 5> kVerbTemplates = {
    "What action is being done in this picture?",
    "Why is this item doing in this picture?",
    "Which action is being taken in this picture?",
    "What action is item doing in this picture?",
    "What action is item performing in this picture?",
};

constexpr std::array<std::string_view, 3> kAdjectiveTemplates = {
    "How to describe one item in this picture?",
    "What is item's ADJ TYPE in this picture?",
    "What is the ADJ TYPE in this picture?",
};

constexpr std::array<std::string_view, 1> kNumberTemplates = {
    "How many things in this picture?",
};

// No boolean row exists in the template table; this one keeps yes/no usable.
constexpr std::array<std::string_view, 1> kBooleanTemplates = {
    "Is this true in this picture?",
};

}  // namespace

std::span<const std::string_view> question_templates(PosClass pos) {
  switch (pos) {
    case PosClass::noun:
      return kNounTemplates;
    case PosClass::verb:
      return kVerbTemplates;
    case PosClass::adjective:
      return kAdjectiveTemplates;
    case PosClass::number:
      return kNumberTemplates;
    case PosClass::boolean:
      return kBooleanTemplates;
  }
  throw ClassificationError("no question templates for part-of-speech value " +
                            std::to_string(static_cast<int>(pos)));
}

ExemplarQA template_question(const AnswerCandidate& candidate, std::uint64_t seed) {
  const auto templates = question_templates(candidate.pos_class);
  Rng rng(seed);
  ExemplarQA qa;
  qa.question = std::string(templates[rng.below(templates.size())]);
  qa.answer = candidate.text;
  qa.source_caption_id = candidate.surface_caption_id;
  qa.generator = QuestionGenerator::template_based;
  return qa;
}

std::string terminate_question(std::string_view generated) {
  std::string q = text::trim(generated);
  while (!q.empty() && (q.back() == '.' || q.back() == '!' || q.back() == ',' ||
                        q.back() == ';' || q.back() == ':' || q.back() == '?' ||
                        q.back() == ' ')) {
    q.pop_back();
  }
  if (q.empty()) return q;
  q.push_back('?');
  return q;
}

ExemplarQA neural_question(const AnswerCandidate& candidate, std::string_view context_caption,
                           const QuestionGeneratorBackend& generator, std::uint64_t fallback_seed) {
  std::string generated;
  try {
    generated = generator.generate(candidate.text, context_caption);
  } catch (const BackendError&) {
    throw;
  } catch (const std::exception& e) {
    throw BackendError("question generator failed for answer '" + candidate.text + "': " +
                       e.what());
  }
  std::string question = terminate_question(generated);
  if (question.empty()) {
    ExemplarQA qa = template_question(candidate, fallback_seed);
    qa.note = "neural generation was empty; template fallback";
    return qa;
  }
  ExemplarQA qa;
  qa.question = std::move(question);
  qa.answer = candidate.text;
  qa.source_caption_id = candidate.surface_caption_id;
  qa.generator = QuestionGenerator::neural;
  return qa;
}

std::vector<ExemplarQA> agnostic_exemplars(std::span<const ExemplarQA> pool, std::size_t count,
                                           std::uint64_t seed) {
  if (count > pool.size()) {
    throw ArgumentError("cannot draw " + std::to_string(count) + " agnostic exemplars from a pool of " +
                        std::to_string(pool.size()));
  }
  Rng rng(seed);
  std::vector<ExemplarQA> out;
  out.reserve(count);
  for (std::size_t i : rng.choose(pool.size(), count)) {
    ExemplarQA qa = pool[i];
    qa.generator = QuestionGenerator::agnostic;
    out.push_back(std::move(qa));
  }
  return out;
}

}  // namespace zsvqa
