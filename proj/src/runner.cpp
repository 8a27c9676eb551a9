#include "zsvqa/runner.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "zsvqa/errors.hpp"
#include "zsvqa/eval.hpp"

namespace zsvqa {

using json = nlohmann::json;
namespace fs = std::filesystem;

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
}

namespace {

json error_record(const std::string& config_hash, const VQASample& sample, const std::string& stage,
                  const std::string& message) {
  return json{{"config_hash", config_hash},
              {"image_id", sample.image_id},
              {"question_id", sample.question_id},
              {"question", sample.question},
              {"error", {{"stage", stage}, {"message", message}}}};
}

struct Failure {
  std::string stage;
  std::string message;
};

Failure describe(const std::exception& e, const char* default_stage) {
  if (const auto* s = dynamic_cast<const StageError*>(&e)) {
    return {s->stage(), e.what()};
  }
  return {default_stage, e.what()};
}

struct PreparedSlot {
  std::optional<PreparedSample> prepared;
  std::optional<Failure> failure;
};

std::vector<PreparedSlot> prepare_all(const std::vector<VQASample>& samples,
                                      const std::vector<std::size_t>& indices,
                                      const RunConfig& config, const BackendSet& backends,
                                      std::size_t workers) {
  std::vector<PreparedSlot> slots(samples.size());
  parallel_for(indices.size(), workers, [&](std::size_t n) {
    const std::size_t i = indices[n];
    const VQASample& s = samples[i];
    try {
      Image image;
      try {
        image = load_image(s);
      } catch (const std::exception& e) {
        throw StageError("image", e.what(), std::current_exception());
      }
      slots[i].prepared = prepare_sample(image, s.question, config, backends,
                                         sample_seed(config.seed, s.image_id, s.question_id));
    } catch (const std::exception& e) {
      slots[i].failure = describe(e, "prepare");
    }
  });
  return slots;
}

// Template exemplars of each prepared sample, used as the agnostic pool.
std::vector<std::vector<ExemplarQA>> agnostic_sources(const std::vector<VQASample>& samples,
                                                      const std::vector<PreparedSlot>& slots,
                                                      const RunConfig& config,
                                                      const BackendSet& backends) {
  RunConfig tpl = config;
  tpl.question_generator = QuestionGenerator::template_based;
  tpl.question_strategy = ExemplarStrategy::max_freq;
  tpl.exemplar_count = std::max<std::size_t>(config.exemplar_count, 1);
  std::vector<std::vector<ExemplarQA>> out(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!slots[i].prepared) continue;
    out[i] = build_exemplars(*slots[i].prepared, tpl, backends, {},
                             sample_seed(config.seed, samples[i].image_id, samples[i].question_id));
  }
  return out;
}

std::vector<ExemplarQA> pool_without(const std::vector<std::vector<ExemplarQA>>& sources,
                                     std::size_t self) {
  std::vector<ExemplarQA> pool;
  for (std::size_t j = 0; j < sources.size(); ++j) {
    if (j == self) continue;
    pool.insert(pool.end(), sources[j].begin(), sources[j].end());
  }
  return pool;
}

json answer_and_score(const VQASample& sample, const PreparedSlot& slot,
                      std::span<const ExemplarQA> pool, const RunConfig& config,
                      const BackendSet& backends, const std::string& hash) {
  if (slot.failure) return error_record(hash, sample, slot.failure->stage, slot.failure->message);
  try {
    const PreparedSample& prepared = *slot.prepared;
    const std::uint64_t seed = sample_seed(config.seed, sample.image_id, sample.question_id);
    auto exemplars = build_exemplars(prepared, config, backends, pool, seed);
    SampleOutcome outcome = answer_prepared(prepared, std::move(exemplars), config, backends, seed);
    json rec = sample_record(hash, sample.question_id, prepared, outcome, *backends.completion);
    score_record(rec, sample.answers, *backends.completion);
    return rec;
  } catch (const std::exception& e) {
    const Failure f = describe(e, "answer");
    return error_record(hash, sample, f.stage, f.message);
  }
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

void aggregate(EvalResult& result) {
  double vqa = 0.0;
  double ahr = 0.0;
  double anr = 0.0;
  std::size_t n_ahr = 0;
  std::size_t n_anr = 0;
  result.completed = 0;
  for (const auto& r : result.records) {
    if (r.contains("error")) continue;
    ++result.completed;
    vqa += r.at("vqa_score").get<double>();
    if (!r.at("ahr").is_null()) {
      ahr += r.at("ahr").get<double>();
      ++n_ahr;
    }
    if (!r.at("anr").is_null()) {
      anr += r.at("anr").get<double>();
      ++n_anr;
    }
  }
  result.total = result.records.size();
  result.completion_rate =
      result.total == 0 ? 0.0 : static_cast<double>(result.completed) / static_cast<double>(result.total);
  result.vqa_score = result.completed == 0 ? 0.0 : vqa / static_cast<double>(result.completed);
  result.ahr = n_ahr == 0 ? std::nullopt : std::optional<double>(ahr / static_cast<double>(n_ahr));
  result.anr = n_anr == 0 ? std::nullopt : std::optional<double>(anr / static_cast<double>(n_anr));
}

std::unordered_map<std::string, json> read_manifest(const std::string& path, const std::string& hash) {
  std::unordered_map<std::string, json> out;
  std::ifstream in(path);
  if (!in) return out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object()) continue;  // torn final line
    if (rec.value("config_hash", std::string{}) != hash || rec.contains("error")) continue;
    std::string qid = rec.value("question_id", std::string{});
    out[qid] = std::move(rec);
  }
  return out;
}

}  // namespace

void score_record(json& record, const std::vector<std::string>& ground_truths,
                  const TokenCounter& tokenizer) {
  std::vector<ExemplarQA> exemplars;
  for (const auto& e : record.at("exemplars")) {
    ExemplarQA qa;
    qa.question = e.at("question").get<std::string>();
    qa.answer = e.at("answer").get<std::string>();
    exemplars.push_back(std::move(qa));
  }
  record["ground_truths"] = ground_truths;
  record["vqa_score"] = vqa_score(record.at("prediction").get<std::string>(), ground_truths);
  record["ahr"] = optional_json(answer_hit_rate(exemplars, ground_truths));
  record["anr"] = optional_json(
      answer_noise_rate(record.at("exemplar_section").get<std::string>(), ground_truths, tokenizer));
}

AnswerRun answer_one(const std::string& image_path, const std::string& question,
                     const RunConfig& config, const BackendSet& backends) {
  config.validate();
  Image image = load_image_file(image_path);
  const std::uint64_t seed = sample_seed(config.seed, image.id, question);
  PreparedSample prepared = prepare_sample(image, question, config, backends, seed);
  auto exemplars = build_exemplars(prepared, config, backends, {}, seed);
  SampleOutcome outcome = answer_prepared(prepared, std::move(exemplars), config, backends, seed);
  AnswerRun run;
  run.answer = outcome.prediction;
  run.record = sample_record(config.hash(), "", prepared, outcome, *backends.completion);
  run.record["image_path"] = image_path;
  return run;
}

EvalResult evaluate(const std::vector<VQASample>& samples, const RunConfig& config,
                    const BackendSet& backends, const EvalOptions& options) {
  config.validate();
  const std::string hash = config.hash();
  EvalResult result;
  result.config_hash = hash;

  std::unordered_map<std::string, json> previous;
  const bool have_manifest = !options.manifest_path.empty();
  if (have_manifest && options.resume) previous = read_manifest(options.manifest_path, hash);

  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!previous.contains(samples[i].question_id)) pending.push_back(i);
  }

  const bool agnostic = config.question_generator == QuestionGenerator::agnostic &&
                        config.exemplar_count > 0;
  std::vector<std::size_t> to_prepare = pending;
  if (agnostic) {
    to_prepare.resize(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) to_prepare[i] = i;
  }
  const auto slots = prepare_all(samples, to_prepare, config, backends, options.workers);
  std::vector<std::vector<ExemplarQA>> sources;
  if (agnostic) sources = agnostic_sources(samples, slots, config, backends);

  std::ofstream manifest;
  if (have_manifest) {
    const fs::path path(options.manifest_path);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    manifest.open(path, options.resume ? std::ios::app : std::ios::trunc);
    if (!manifest) throw IoError("cannot write manifest '" + options.manifest_path + "'");
  }

  // Records are flushed in dataset order as soon as their predecessors are done.
  std::vector<json> fresh(samples.size());
  std::vector<char> done(pending.size(), 0);
  std::size_t next_flush = 0;
  std::mutex flush_mutex;
  parallel_for(pending.size(), options.workers, [&](std::size_t n) {
    const std::size_t i = pending[n];
    std::vector<ExemplarQA> pool;
    if (agnostic) pool = pool_without(sources, i);
    json rec = answer_and_score(samples[i], slots[i], pool, config, backends, hash);
    std::lock_guard lock(flush_mutex);
    fresh[i] = std::move(rec);
    done[n] = 1;
    if (!have_manifest) return;
    for (; next_flush < pending.size() && done[next_flush]; ++next_flush) {
      manifest << fresh[pending[next_flush]].dump() << '\n';
    }
    manifest.flush();
  });
  if (have_manifest && !manifest) throw IoError("failed writing manifest '" + options.manifest_path + "'");

  result.records.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto it = previous.find(samples[i].question_id);
    if (it != previous.end()) {
      result.records.push_back(it->second);
      ++result.reused;
    } else {
      result.records.push_back(std::move(fresh[i]));
    }
  }
  aggregate(result);
  return result;
}

json summary_json(const EvalResult& r) {
  return json{{"config_hash", r.config_hash},
              {"total", r.total},
              {"completed", r.completed},
              {"completion_rate", r.completion_rate},
              {"vqa_score", r.vqa_score},
              {"ahr", optional_json(r.ahr)},
              {"anr", optional_json(r.anr)},
              {"reused", r.reused}};
}

std::vector<RunConfig> SweepGrid::expand(const RunConfig& base) const {
  auto or_base = [](const auto& axis, auto value) {
    using T = decltype(value);
    return axis.empty() ? std::vector<T>{value} : std::vector<T>(axis.begin(), axis.end());
  };
  std::vector<RunConfig> out;
  for (auto gen : or_base(question_generators, base.question_generator)) {
    for (auto qs : or_base(question_strategies, base.question_strategy)) {
      for (auto cs : or_base(caption_strategies, base.caption_strategy)) {
        for (auto layout : or_base(layouts, base.layout)) {
          for (auto qa : or_base(qa_counts, base.exemplar_count)) {
            for (auto cc : or_base(caption_counts, base.caption_count)) {
              RunConfig c = base;
              c.question_generator = gen;
              c.question_strategy = qs;
              c.caption_strategy = cs;
              c.layout = layout;
              c.exemplar_count = qa;
              c.caption_count = cc;
              out.push_back(std::move(c));
            }
          }
        }
      }
    }
  }
  return out;
}

SweepGrid SweepGrid::count_grid() {
  SweepGrid g;
  g.caption_counts = {0, 10, 20, 30, 40, 50};
  g.qa_counts = {0, 10, 20, 30, 40, 50};
  return g;
}

namespace {

json cell_json(const SweepCell& cell) {
  json j = summary_json(cell.result);
  j["config"] = cell.config.semantic_json();
  j["error"] = cell.error;
  return j;
}

EvalResult result_from_json(const json& j) {
  EvalResult r;
  r.config_hash = j.at("config_hash").get<std::string>();
  r.total = j.at("total").get<std::size_t>();
  r.completed = j.at("completed").get<std::size_t>();
  r.completion_rate = j.at("completion_rate").get<double>();
  r.vqa_score = j.at("vqa_score").get<double>();
  if (!j.at("ahr").is_null()) r.ahr = j.at("ahr").get<double>();
  if (!j.at("anr").is_null()) r.anr = j.at("anr").get<double>();
  return r;
}

}  // namespace

std::vector<SweepCell> run_sweep(const std::vector<VQASample>& samples, const RunConfig& base,
                                 const SweepGrid& grid, const BackendSet& backends,
                                 const std::string& cache_dir, std::size_t workers) {
  base.validate();
  const auto configs = grid.expand(base);
  if (!cache_dir.empty()) fs::create_directories(cache_dir);

  std::vector<SweepCell> cells;
  cells.reserve(configs.size());
  std::vector<std::size_t> uncached;
  bool any_agnostic = false;
  for (const auto& c : configs) {
    SweepCell cell;
    cell.config = c;
    cell.config_hash = c.hash();
    const fs::path file = fs::path(cache_dir) / (cell.config_hash + ".json");
    if (!cache_dir.empty() && fs::exists(file)) {
      const json j = json::parse(read_file(file.string()), nullptr, false);
      if (!j.is_discarded() && j.is_object()) {
        cell.result = result_from_json(j);
        cell.error = j.value("error", std::string{});
        cell.cached = true;
      }
    }
    if (!cell.cached) {
      uncached.push_back(cells.size());
      any_agnostic |= c.question_generator == QuestionGenerator::agnostic;
    }
    cells.push_back(std::move(cell));
  }
  if (uncached.empty()) return cells;

  std::vector<std::size_t> all(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) all[i] = i;
  const auto slots = prepare_all(samples, all, base, backends, workers);
  std::vector<std::vector<ExemplarQA>> sources;
  if (any_agnostic) sources = agnostic_sources(samples, slots, base, backends);

  for (std::size_t ci : uncached) {
    SweepCell& cell = cells[ci];
    try {
      const bool agnostic = cell.config.question_generator == QuestionGenerator::agnostic;
      std::vector<json> records(samples.size());
      parallel_for(samples.size(), workers, [&](std::size_t i) {
        std::vector<ExemplarQA> pool;
        if (agnostic) pool = pool_without(sources, i);
        records[i] = answer_and_score(samples[i], slots[i], pool, cell.config, backends, cell.config_hash);
      });
      cell.result.config_hash = cell.config_hash;
      cell.result.records = std::move(records);
      aggregate(cell.result);
      cell.result.records.clear();
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
    if (!cache_dir.empty()) {
      std::ofstream out(fs::path(cache_dir) / (cell.config_hash + ".json"));
      out << cell_json(cell).dump(2) << '\n';
    }
  }
  return cells;
}

std::string sweep_table(const std::vector<SweepCell>& cells) {
  std::ostringstream out;
  out << "config_hash\tcaption_count\tqa_count\tquestion_generator\tquestion_strategy\t"
         "caption_strategy\tlayout\tvqa_score\tahr\tanr\tcompletion_rate\tcached\terror\n";
  auto opt = [](const std::optional<double>& v) { return v ? std::to_string(*v) : std::string("NA"); };
  for (const auto& c : cells) {
    out << c.config_hash << '\t' << c.config.caption_count << '\t' << c.config.exemplar_count << '\t'
        << to_string(c.config.question_generator) << '\t' << to_string(c.config.question_strategy)
        << '\t' << to_string(c.config.caption_strategy) << '\t' << to_string(c.config.layout) << '\t'
        << std::to_string(c.result.vqa_score) << '\t' << opt(c.result.ahr) << '\t'
        << opt(c.result.anr) << '\t' << std::to_string(c.result.completion_rate) << '\t'
        << (c.cached ? "yes" : "no") << '\t' << c.error << '\n';
  }
  return out.str();
}

}  // namespace zsvqa
