// zsvqa: answer one question about an image, or evaluate a dataset.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "zsvqa/errors.hpp"
#include "zsvqa/runner.hpp"

namespace fs = std::filesystem;
using namespace zsvqa;

namespace {

struct Flags {
  RunConfig config;
  std::string dataset = "desk";
  std::string backend = "mock";
  std::string clamp_mode = "relu_gradient";
  std::string patch_draw = "per_caption";
  std::string question_generator = "template";
  std::string question_strategy = "max_freq";
  std::string caption_strategy = "min_freq";
  std::string layout = "ccc_qaqaqa";
};

void add_config_flags(CLI::App& app, Flags& f) {
  RunConfig& c = f.config;
  app.add_option("--backend", f.backend, "Completion backend: mock, local or remote")
      ->check(CLI::IsMember({"mock", "local", "remote"}))
      ->capture_default_str();
  app.add_option("--endpoint", c.endpoint,
                 "Completion endpoint URL (default: $ZSVQA_COMPLETION_URL, or localhost for local)");
  app.add_option("--timeout-ms", c.timeout_ms, "Per-request timeout")->capture_default_str();
  app.add_option("--seed", c.seed, "Run seed")->capture_default_str();
  app.add_option("--patches", c.patches, "Patches sampled per caption")->capture_default_str();
  app.add_option("--captions", c.captions, "Captions generated per question")->capture_default_str();
  app.add_option("--top-k", c.top_k, "Top-k for caption decoding")->capture_default_str();
  app.add_option("--threshold", c.threshold, "Caption match-score threshold")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  app.add_option("--clamp-mode", f.clamp_mode, "Gradient clamp: relu_gradient or paper_literal_min")
      ->capture_default_str();
  app.add_option("--patch-draw", f.patch_draw, "Patch sampling: per_caption or shared")
      ->capture_default_str();
  app.add_option("--exemplar-count", c.exemplar_count, "Synthetic QA pairs in the prompt")
      ->capture_default_str();
  app.add_option("--caption-count", c.caption_count, "Captions in the prompt")->capture_default_str();
  app.add_option("--budget", c.budget, "Prompt token budget")->capture_default_str();
  app.add_option("--max-new-tokens", c.max_new_tokens, "Answer length limit")->capture_default_str();
  app.add_option("--question-generator", f.question_generator, "template, neural or agnostic")
      ->capture_default_str();
  app.add_option("--question-strategy", f.question_strategy, "Exemplar choice: max_freq or random")
      ->capture_default_str();
  app.add_option("--caption-strategy", f.caption_strategy,
                 "Caption choice: min_freq, max_freq or random")
      ->capture_default_str();
  app.add_option("--layout", f.layout, "Prompt layout: ccc_qaqaqa or cqa_interleaved")
      ->capture_default_str();
  app.add_option("--workers", c.workers, "Worker threads")->capture_default_str();
  app.add_option("--out", c.out, "Output directory")->capture_default_str();
}

void resolve(Flags& f) {
  RunConfig& c = f.config;
  c.backend = backend_kind_from_string(f.backend);
  c.clamp_mode = clamp_mode_from_string(f.clamp_mode);
  c.patch_draw = patch_draw_from_string(f.patch_draw);
  c.question_generator = question_generator_from_string(f.question_generator);
  c.question_strategy = exemplar_strategy_from_string(f.question_strategy);
  c.caption_strategy = caption_strategy_from_string(f.caption_strategy);
  c.layout = prompt_layout_from_string(f.layout);
  c.dataset.kind = dataset_kind_from_string(f.dataset);
  c.validate();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  out << text;
  if (!out) throw IoError("cannot write '" + path.string() + "'");
}

int run_answer(Flags& f, const std::string& image, const std::string& question) {
  resolve(f);
  const BackendSet backends = make_backends(f.config);
  AnswerRun run = answer_one(image, question, f.config, backends);
  fs::create_directories(f.config.out);
  const fs::path manifest = fs::path(f.config.out) / "answer.jsonl";
  std::ofstream out(manifest, std::ios::app);
  out << run.record.dump() << '\n';
  if (!out) throw IoError("cannot write '" + manifest.string() + "'");
  std::cout << run.answer << '\n';
  return 0;
}

int run_eval(Flags& f, bool sweep, bool fresh) {
  resolve(f);
  const BackendSet backends = make_backends(f.config);
  const auto samples = load_dataset(f.config.dataset);
  const fs::path out_dir(f.config.out);
  fs::create_directories(out_dir);

  if (sweep) {
    const auto cells = run_sweep(samples, f.config, SweepGrid::count_grid(), backends,
                                 (out_dir / "cells").string(), f.config.workers);
    const std::string table = sweep_table(cells);
    write_text(out_dir / "sweep.tsv", table);
    std::cout << table;
    std::size_t failed = 0;
    for (const auto& c : cells) failed += c.error.empty() ? 0 : 1;
    if (failed > 0) std::cerr << failed << " of " << cells.size() << " cells failed\n";
    return 0;
  }

  EvalOptions options;
  options.workers = f.config.workers;
  options.manifest_path = (out_dir / "manifest.jsonl").string();
  options.resume = !fresh;
  const EvalResult result = evaluate(samples, f.config, backends, options);

  std::size_t failures = 0;
  for (const auto& r : result.records) {
    if (!r.contains("error")) continue;
    ++failures;
    const auto& e = r.at("error");
    std::cerr << "sample " << r.value("question_id", std::string{}) << " failed at "
              << e.value("stage", std::string{}) << ": " << e.value("message", std::string{}) << '\n';
  }
  const nlohmann::json summary = summary_json(result);
  write_text(out_dir / "summary.json", summary.dump(2) + "\n");
  std::cout << summary.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-shot visual question answering with a frozen language model"};
  app.require_subcommand(1);

  Flags answer_flags;
  std::string image;
  std::string question;
  auto* answer = app.add_subcommand("answer", "Answer one question about an image");
  answer->add_option("--image", image, "Image file (a scene JSON file for the mock backends)")
      ->required();
  answer->add_option("--question", question, "Question text")->required();
  add_config_flags(*answer, answer_flags);

  Flags eval_flags;
  bool sweep = false;
  bool fresh = false;
  auto* eval = app.add_subcommand("eval", "Evaluate a dataset split");
  eval->add_option("--dataset", eval_flags.dataset, "desk, vqav2, okvqa or aokvqa")
      ->capture_default_str();
  eval->add_option("--split", eval_flags.config.dataset.split, "Split name used in image file names")
      ->capture_default_str();
  eval->add_option("--questions", eval_flags.config.dataset.questions_path,
                   "Questions JSON (the single data file for desk and aokvqa)")
      ->required();
  eval->add_option("--annotations", eval_flags.config.dataset.annotations_path,
                   "Annotations JSON (vqav2, okvqa)");
  eval->add_option("--images", eval_flags.config.dataset.images_dir, "Image directory");
  eval->add_flag("--sweep", sweep, "Run the caption-count x QA-count grid");
  eval->add_flag("--fresh", fresh, "Overwrite the manifest instead of resuming");
  add_config_flags(*eval, eval_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*answer) return run_answer(answer_flags, image, question);
    return run_eval(eval_flags, sweep, fresh);
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error [io]: " << e.what() << '\n';
    return 3;
  } catch (const StageError& e) {
    std::cerr << "error [" << e.stage() << "]: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
