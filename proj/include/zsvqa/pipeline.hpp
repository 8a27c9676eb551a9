#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include "zsvqa/errors.hpp"
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "zsvqa/adapters.hpp"
#include "zsvqa/answers.hpp"
#include "zsvqa/captioner.hpp"
#include "zsvqa/config.hpp"
#include "zsvqa/promptkit.hpp"
#include "zsvqa/questions.hpp"
#include "zsvqa/relevance.hpp"

namespace zsvqa {

// A failure inside one pipeline stage. `what()` is "<stage>: <cause>"; the
// original exception is kept for callers that need its type.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message, std::exception_ptr cause)
      : Error(stage + ": " + message), stage_(std::move(stage)), cause_(std::move(cause)) {}

  const std::string& stage() const noexcept { return stage_; }
  const std::exception_ptr& cause() const noexcept { return cause_; }
  [[noreturn]] void rethrow_cause() const { std::rethrow_exception(cause_); }

 private:
  std::string stage_;
  std::exception_ptr cause_;
};

struct BackendSet {
  std::shared_ptr<const MatcherBackend> matcher;
  std::shared_ptr<const CaptionDecoderBackend> decoder;
  std::shared_ptr<const QuestionGeneratorBackend> question_generator;
  std::shared_ptr<const CompletionBackend> completion;
  std::shared_ptr<const SyntacticParser> parser;
};

// Scene mocks for the vision and question models, the lexicon parser, and a
// completion backend chosen by config.backend.
BackendSet make_backends(const RunConfig& config);

// Everything computed from (image, question) before prompt-specific choices.
struct PreparedSample {
  std::string image_id;
  std::string question;
  int attention_layer = 0;
  PatchRelevanceMap relevance;
  std::size_t raw_captions = 0;
  std::vector<std::size_t> decode_gaps;
  std::size_t dedup_dropped = 0;
  CaptionSet captions;
  bool fallback_caption = false;
  std::vector<AnswerCandidate> candidates;
};

struct SampleOutcome {
  std::vector<std::size_t> selected_caption_ids;
  PromptBundle prompt;
  std::string completion;
  std::string prediction;  // cleaned; empty means no answer
};

// Relevance, caption generation/dedup/filter, and answer extraction.
PreparedSample prepare_sample(const Image& image, const std::string& question,
                              const RunConfig& config, const BackendSet& backends,
                              std::uint64_t sample_seed);

// Exemplar pairs for the prompt according to config (generator + strategy).
// `agnostic_pool` supplies other images' pairs for the agnostic generator.
std::vector<ExemplarQA> build_exemplars(const PreparedSample& prepared, const RunConfig& config,
                                        const BackendSet& backends,
                                        std::span<const ExemplarQA> agnostic_pool,
                                        std::uint64_t sample_seed);

// Caption selection, prompt assembly, greedy completion, answer cleaning.
SampleOutcome answer_prepared(const PreparedSample& prepared, std::vector<ExemplarQA> exemplars,
                              const RunConfig& config, const BackendSet& backends,
                              std::uint64_t sample_seed);

// Per-sample seed derived from the run seed and the question identity.
std::uint64_t sample_seed(std::uint64_t run_seed, const std::string& image_id,
                          const std::string& question_id);

// JSON form of one processed sample as written to the run manifest.
nlohmann::json sample_record(const std::string& config_hash, const std::string& question_id,
                             const PreparedSample& prepared, const SampleOutcome& outcome,
                             const TokenCounter& tokenizer);

}  // namespace zsvqa
