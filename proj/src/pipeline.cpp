#include "zsvqa/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <exception>

#include "zsvqa/errors.hpp"
#include "zsvqa/lexicon_parser.hpp"
#include "zsvqa/mock_backends.hpp"
#include "zsvqa/random.hpp"
#include "zsvqa/remote_completion.hpp"

namespace zsvqa {

using json = nlohmann::json;

BackendSet make_backends(const RunConfig& config) {
  BackendSet set;
  set.matcher = std::make_shared<mock::SceneMatcher>();
  set.decoder = std::make_shared<mock::SceneCaptionDecoder>();
  set.question_generator = std::make_shared<mock::ClozeQuestionGenerator>();
  set.parser = std::make_shared<LexiconParser>();
  switch (config.backend) {
    case BackendKind::mock:
      set.completion = std::make_shared<mock::OverlapCompletion>();
      break;
    case BackendKind::local:
    case BackendKind::remote: {
      EndpointConfig ep;
      ep.url = config.endpoint;
      if (ep.url.empty() && config.backend == BackendKind::local) ep.url = kLocalEndpoint;
      ep.timeout = std::chrono::milliseconds(config.timeout_ms);
      ep.max_new_tokens = config.max_new_tokens;
      set.completion = std::make_shared<RemoteCompletionBackend>(resolve_endpoint(ep));
      break;
    }
  }
  return set;
}

namespace {

template <typename F>
auto in_stage(const char* stage, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what(), std::current_exception());
  }
}

}  // namespace

std::uint64_t sample_seed(std::uint64_t run_seed, const std::string& image_id,
                          const std::string& question_id) {
  return derive_seed(derive_seed(run_seed, image_id), question_id);
}

PreparedSample prepare_sample(const Image& image, const std::string& question,
                              const RunConfig& config, const BackendSet& backends,
                              std::uint64_t seed) {
  PreparedSample out;
  out.image_id = image.id;
  out.question = question;

  in_stage("relevance", [&] {
    const AttentionBundle bundle = backends.matcher->attention_bundle(image, question);
    out.attention_layer = bundle.layer_index;
    out.relevance = patch_relevance(bundle, config.clamp_mode);
    return 0;
  });

  CaptionBatch batch = in_stage("captions", [&] {
    QuestionRelevantCaptionOptions opts;
    opts.patch_count = config.patches;
    opts.caption_count = config.captions;
    opts.top_k = config.top_k;
    opts.patch_draw = config.patch_draw;
    return generate_question_relevant_captions(image, out.relevance, *backends.decoder, opts,
                                               derive_seed(seed, "captions"));
  });
  out.raw_captions = batch.captions.size();
  out.decode_gaps = batch.gaps;

  in_stage("caption-filter", [&] {
    auto unique = dedup_substrings(std::move(batch.captions));
    out.dedup_dropped = out.raw_captions - unique.size();
    out.captions = filter_by_match(std::move(unique), *backends.matcher, image, config.threshold);
    out.captions.target_size = config.captions;
    out.fallback_caption = ensure_nonempty(out.captions, image, *backends.decoder, *backends.matcher,
                                           config.top_k, seed);
    return 0;
  });

  out.candidates = in_stage("answers", [&] {
    return extract_candidates(out.captions, *backends.parser);
  });
  return out;
}

std::vector<ExemplarQA> build_exemplars(const PreparedSample& prepared, const RunConfig& config,
                                        const BackendSet& backends,
                                        std::span<const ExemplarQA> agnostic_pool,
                                        std::uint64_t seed) {
  return in_stage("questions", [&] {
    std::vector<ExemplarQA> out;
    if (config.exemplar_count == 0) return out;
    if (config.question_generator == QuestionGenerator::agnostic) {
      const std::size_t n = std::min(config.exemplar_count, agnostic_pool.size());
      return agnostic_exemplars(agnostic_pool, n, derive_seed(seed, "agnostic"));
    }
    const auto chosen = select_exemplars(prepared.candidates, config.question_strategy,
                                         config.exemplar_count, derive_seed(seed, "exemplars"));
    out.reserve(chosen.size());
    for (const auto& c : chosen) {
      const std::uint64_t qseed = derive_seed(seed, "template:" + c.key);
      ExemplarQA qa =
          config.question_generator == QuestionGenerator::neural
              ? neural_question(c, prepared.captions.captions.at(c.surface_caption_id).text,
                                *backends.question_generator, qseed)
              : template_question(c, qseed);
      qa.source_image_id = prepared.image_id;
      out.push_back(std::move(qa));
    }
    return out;
  });
}

SampleOutcome answer_prepared(const PreparedSample& prepared, std::vector<ExemplarQA> exemplars,
                              const RunConfig& config, const BackendSet& backends,
                              std::uint64_t seed) {
  SampleOutcome out;
  out.selected_caption_ids = select_captions(prepared.captions.captions, prepared.candidates,
                                             config.caption_strategy, config.caption_count,
                                             derive_seed(seed, "caption-select"));
  std::vector<std::string> texts;
  texts.reserve(out.selected_caption_ids.size());
  for (std::size_t id : out.selected_caption_ids) texts.push_back(prepared.captions.captions[id].text);

  out.prompt = in_stage("prompt", [&] {
    return assemble_prompt(kInstruction, std::move(texts), std::move(exemplars), prepared.question,
                           config.layout, *backends.completion, config.budget);
  });
  out.completion = in_stage("completion", [&] {
    return backends.completion->complete_greedy(out.prompt.text, config.max_new_tokens);
  });
  out.prediction = clean_answer(out.completion);
  return out;
}

json sample_record(const std::string& config_hash, const std::string& question_id,
                   const PreparedSample& prepared, const SampleOutcome& outcome,
                   const TokenCounter& tokenizer) {
  json captions = json::array();
  for (const auto& c : prepared.captions.captions) {
    captions.push_back({{"text", c.text}, {"match_score", c.match_score}});
  }
  json candidates = json::array();
  for (const auto& c : prepared.candidates) {
    candidates.push_back(
        {{"text", c.text}, {"pos_class", to_string(c.pos_class)}, {"frequency", c.frequency}});
  }
  json exemplars = json::array();
  for (const auto& qa : outcome.prompt.exemplars) {
    json e = {{"question", qa.question},
              {"answer", qa.answer},
              {"generator", to_string(qa.generator)},
              {"source_image_id", qa.source_image_id}};
    e["source_caption_id"] = qa.source_caption_id ? json(*qa.source_caption_id) : json(nullptr);
    if (!qa.note.empty()) e["note"] = qa.note;
    exemplars.push_back(std::move(e));
  }
  const std::string section = render_exemplar_section(outcome.prompt.exemplars);

  json rec;
  rec["config_hash"] = config_hash;
  rec["image_id"] = prepared.image_id;
  rec["question_id"] = question_id;
  rec["question"] = prepared.question;
  rec["relevance"] = {{"clamp_mode", to_string(prepared.relevance.clamp_mode)},
                      {"layer", prepared.attention_layer},
                      {"scores", prepared.relevance.scores}};
  rec["caption_stats"] = {{"raw", prepared.raw_captions},
                          {"decode_gaps", prepared.decode_gaps.size()},
                          {"dedup_dropped", prepared.dedup_dropped},
                          {"filter_dropped", prepared.captions.dropped_by_filter},
                          {"all_filtered", prepared.captions.all_filtered},
                          {"fallback_caption", prepared.fallback_caption}};
  rec["captions"] = std::move(captions);
  rec["candidates"] = std::move(candidates);
  rec["selected_caption_ids"] = outcome.selected_caption_ids;
  rec["exemplars"] = std::move(exemplars);
  rec["prompt"] = outcome.prompt.text;
  rec["prompt_tokens"] = outcome.prompt.token_count;
  rec["trimmed"] = {{"exemplars", outcome.prompt.trimmed_exemplars},
                    {"captions", outcome.prompt.trimmed_captions}};
  rec["exemplar_section"] = section;
  rec["exemplar_section_tokens"] = tokenizer.token_count(section);
  rec["tokenizer"] = tokenizer.tokenizer_name();
  rec["completion"] = outcome.completion;
  rec["prediction"] = outcome.prediction;
  return rec;
}

}  // namespace zsvqa
