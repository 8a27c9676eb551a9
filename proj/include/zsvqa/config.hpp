#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include <json.hpp>

#include "zsvqa/captioner.hpp"
#include "zsvqa/datasets.hpp"
#include "zsvqa/promptkit.hpp"
#include "zsvqa/questions.hpp"
#include "zsvqa/relevance.hpp"

namespace zsvqa {

enum class BackendKind {
  mock,    // scene-driven mocks for every model
  local,   // completion server on localhost, scene mocks for vision
  remote,  // completion server at --endpoint / env, scene mocks for vision
};

std::string_view to_string(BackendKind kind);
BackendKind backend_kind_from_string(std::string_view name);

inline constexpr std::string_view kLocalEndpoint = "http://127.0.0.1:8080/complete";

struct RunConfig {
  DatasetSource dataset;

  BackendKind backend = BackendKind::mock;
  std::string endpoint;
  std::size_t timeout_ms = 30000;

  std::uint64_t seed = 0;
  std::size_t patches = 20;       // K' patches drawn per caption
  std::size_t captions = 100;     // M raw captions
  std::size_t top_k = 50;
  double threshold = 0.5;
  ClampMode clamp_mode = ClampMode::relu_gradient;
  PatchDraw patch_draw = PatchDraw::per_caption;

  std::size_t exemplar_count = 30;
  std::size_t caption_count = 30;
  std::size_t budget = kDefaultTokenBudget;
  std::size_t max_new_tokens = 10;

  QuestionGenerator question_generator = QuestionGenerator::template_based;
  ExemplarStrategy question_strategy = ExemplarStrategy::max_freq;
  CaptionStrategy caption_strategy = CaptionStrategy::min_freq;
  PromptLayout layout = PromptLayout::ccc_qaqaqa;

  // Operational knobs, excluded from the hash.
  std::size_t workers = 1;
  std::string out = "run";

  void validate() const;  // throws ArgumentError

  // Every field that can change a result, with stable key order.
  nlohmann::json semantic_json() const;
  // Fields that determine captions and answer candidates only.
  nlohmann::json upstream_json() const;

  std::string hash() const;           // 16 hex digits of semantic_json
  std::string upstream_hash() const;  // 16 hex digits of upstream_json
};

std::string hex64(std::uint64_t value);

}  // namespace zsvqa
