#include "zsvqa/config.hpp"

#include <cstdio>

#include "zsvqa/errors.hpp"
#include "zsvqa/random.hpp"

namespace zsvqa {

using json = nlohmann::json;

std::string_view to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::mock:
      return "mock";
    case BackendKind::local:
      return "local";
    case BackendKind::remote:
      return "remote";
  }
  return "mock";
}

BackendKind backend_kind_from_string(std::string_view name) {
  if (name == "mock") return BackendKind::mock;
  if (name == "local") return BackendKind::local;
  if (name == "remote") return BackendKind::remote;
  throw ArgumentError("unknown backend '" + std::string(name) + "' (mock|local|remote)");
}

void RunConfig::validate() const {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw ArgumentError("threshold must lie in [0, 1]");
  if (patches == 0) throw ArgumentError("--patches must be at least 1");
  if (captions == 0) throw ArgumentError("--captions must be at least 1");
  if (budget == 0) throw ArgumentError("--budget must be positive");
  if (workers == 0) throw ArgumentError("--workers must be at least 1");
}

json RunConfig::upstream_json() const {
  return json{
      {"seed", seed},
      {"patches", patches},
      {"captions", captions},
      {"top_k", top_k},
      {"threshold", threshold},
      {"clamp_mode", to_string(clamp_mode)},
      {"patch_draw", to_string(patch_draw)},
      {"backend", to_string(backend)},
  };
}

json RunConfig::semantic_json() const {
  json j = upstream_json();
  j["dataset"] = {{"kind", to_string(dataset.kind)},
                  {"split", dataset.split},
                  {"questions", dataset.questions_path},
                  {"annotations", dataset.annotations_path},
                  {"images", dataset.images_dir}};
  j["endpoint"] = backend == BackendKind::mock ? std::string{} : endpoint;
  j["exemplar_count"] = exemplar_count;
  j["caption_count"] = caption_count;
  j["budget"] = budget;
  j["max_new_tokens"] = max_new_tokens;
  j["question_generator"] = to_string(question_generator);
  j["question_strategy"] = to_string(question_strategy);
  j["caption_strategy"] = to_string(caption_strategy);
  j["layout"] = to_string(layout);
  return j;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string RunConfig::hash() const { return hex64(fnv1a64(semantic_json().dump())); }

std::string RunConfig::upstream_hash() const { return hex64(fnv1a64(upstream_json().dump())); }

}  // namespace zsvqa
