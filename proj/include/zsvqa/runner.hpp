#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "zsvqa/config.hpp"
#include "zsvqa/datasets.hpp"
#include "zsvqa/pipeline.hpp"

namespace zsvqa {

// Runs fn(i) for i in [0, n) on up to `workers` threads. fn must not throw.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

struct AnswerRun {
  std::string answer;
  nlohmann::json record;
};

// Full pipeline for one image file and question. The mock backends expect
// the image file to hold a scene description.
AnswerRun answer_one(const std::string& image_path, const std::string& question,
                     const RunConfig& config, const BackendSet& backends);

struct EvalResult {
  std::string config_hash;
  std::size_t total = 0;
  std::size_t completed = 0;
  double completion_rate = 0.0;
  double vqa_score = 0.0;        // mean over completed samples
  std::optional<double> ahr;     // mean over samples where defined
  std::optional<double> anr;     // mean over samples where defined
  std::size_t reused = 0;        // samples taken from an existing manifest
  std::vector<nlohmann::json> records;  // dataset order
};

struct EvalOptions {
  std::size_t workers = 1;
  std::string manifest_path;  // JSON lines; empty = keep records in memory only
  bool resume = true;         // reuse successful records with the same config hash
};

EvalResult evaluate(const std::vector<VQASample>& samples, const RunConfig& config,
                    const BackendSet& backends, const EvalOptions& options);

// Adds vqa_score / ahr / anr computed from a record's own fields.
void score_record(nlohmann::json& record, const std::vector<std::string>& ground_truths,
                  const TokenCounter& tokenizer);

nlohmann::json summary_json(const EvalResult& result);

struct SweepGrid {
  std::vector<std::size_t> caption_counts;
  std::vector<std::size_t> qa_counts;
  std::vector<QuestionGenerator> question_generators;
  std::vector<ExemplarStrategy> question_strategies;
  std::vector<CaptionStrategy> caption_strategies;
  std::vector<PromptLayout> layouts;

  // Axes left empty take the base config's value.
  std::vector<RunConfig> expand(const RunConfig& base) const;

  // 0..50 captions x 0..50 QA pairs in steps of 10.
  static SweepGrid count_grid();
};

struct SweepCell {
  RunConfig config;
  std::string config_hash;
  bool cached = false;
  std::string error;
  EvalResult result;  // records are not kept for sweep cells
};

// Each cell is cached as <cache_dir>/<config hash>.json and reloaded on
// later runs. Captions and candidates are computed once for all cells.
std::vector<SweepCell> run_sweep(const std::vector<VQASample>& samples, const RunConfig& base,
                                 const SweepGrid& grid, const BackendSet& backends,
                                 const std::string& cache_dir, std::size_t workers);

// Tab-separated table with one row per cell.
std::string sweep_table(const std::vector<SweepCell>& cells);

}  // namespace zsvqa
