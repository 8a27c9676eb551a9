#include "zsvqa/mock_backends.hpp"

#include <cctype>
#include <algorithm>
#include <array>
#include <cmath>
#include <json.hpp>
#include <map>
#include <set>

#include "zsvqa/errors.hpp"
#include "zsvqa/lexicon_parser.hpp"
#include "zsvqa/random.hpp"
#include "zsvqa/text.hpp"

namespace zsvqa::mock {

using json = nlohmann::json;

namespace {

constexpr std::array<std::string_view, 11> kCountWords = {
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten"};

std::string count_word(int n) {
  if (n >= 0 && n < static_cast<int>(kCountWords.size())) return std::string(kCountWords[n]);
  return std::to_string(n);
}

bool is_content(std::string_view w) {
  return LexiconParser::classify(w) != LexiconParser::WordClass::stop;
}

std::set<std::string> content_stems(std::string_view s) {
  std::set<std::string> out;
  for (const auto& w : text::words(s)) {
    if (is_content(w)) out.insert(stem(w));
  }
  return out;
}

}  // namespace

std::string stem(std::string_view word) {
  std::string w = text::to_lower(word);
  if (w.size() > 3 && w.back() == 's' && w[w.size() - 2] != 's') w.pop_back();
  return w;
}

Scene Scene::parse(std::string_view payload) {
  const json doc = json::parse(payload, nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("patches") ||
      !doc.at("patches").is_array()) {
    throw DataError("mock scene payload must be a JSON object with a 'patches' list");
  }
  Scene scene;
  for (const auto& p : doc.at("patches")) {
    if (!p.is_object() || !p.contains("object") || !p.at("object").is_string()) {
      throw DataError("every scene patch needs a string 'object'");
    }
    ScenePatch patch;
    patch.object = p.at("object").get<std::string>();
    patch.attribute = p.value("attribute", std::string{});
    patch.action = p.value("action", std::string{});
    patch.count = p.value("count", 1);
    scene.patches.push_back(std::move(patch));
  }
  if (scene.patches.empty()) throw DataError("mock scene has no patches");
  return scene;
}

std::vector<std::string> Scene::vocabulary(std::size_t patch) const {
  const ScenePatch& p = patches.at(patch);
  std::vector<std::string> out = text::words(p.object);
  for (auto& w : text::words(p.attribute)) out.push_back(std::move(w));
  for (auto& w : text::words(p.action)) out.push_back(std::move(w));
  if (p.count > 1) {
    out.push_back(count_word(p.count));
    out.push_back(std::to_string(p.count));
  }
  return out;
}

// ---------------------------------------------------------------------------
// SceneMatcher

namespace {

std::vector<double> embed(std::string_view word_stem, std::size_t dim) {
  std::vector<double> v(dim);
  const std::uint64_t base = fnv1a64(word_stem);
  const double mag = 1.0 / std::sqrt(static_cast<double>(dim));
  for (std::size_t j = 0; j < dim; ++j) v[j] = (splitmix64(base + j) & 1U) ? mag : -mag;
  return v;
}

std::set<std::string> patch_stems(const Scene& scene, std::size_t k) {
  std::set<std::string> out;
  for (const auto& w : scene.vocabulary(k)) out.insert(stem(w));
  return out;
}

}  // namespace

std::size_t SceneMatcher::patch_count(const Image& image) const {
  return Scene::parse(image.payload).patches.size();
}

double SceneMatcher::match_score(const Image& image, std::span<const std::size_t> patch_indices,
                                 std::string_view text_in) const {
  const Scene scene = Scene::parse(image.payload);
  std::set<std::string> chosen;
  std::set<std::string> whole;
  for (std::size_t k = 0; k < scene.patches.size(); ++k) {
    auto s = patch_stems(scene, k);
    whole.insert(s.begin(), s.end());
  }
  if (patch_indices.empty()) {
    chosen = whole;
  } else {
    for (std::size_t k : patch_indices) {
      if (k >= scene.patches.size()) throw BackendError("patch index out of range for scene");
      auto s = patch_stems(scene, k);
      chosen.insert(s.begin(), s.end());
    }
  }
  std::size_t n = 0;
  double credit = 0.0;
  for (const auto& w : text::words(text_in)) {
    if (!is_content(w)) continue;
    ++n;
    const std::string s = stem(w);
    if (chosen.contains(s)) {
      credit += 1.0;
    } else if (whole.contains(s)) {
      credit += 0.5;
    }
  }
  return n == 0 ? 0.0 : credit / static_cast<double>(n);
}

AttentionBundle SceneMatcher::attention_bundle(const Image& image, std::string_view question) const {
  const Scene scene = Scene::parse(image.payload);
  auto tokens = text::words(question);
  if (tokens.empty()) tokens.emplace_back("?");
  const std::size_t dim = kEmbeddingDim;
  const std::size_t num_tokens = tokens.size();
  const std::size_t num_patches = scene.patches.size();

  Matrix query(num_tokens, dim);
  for (std::size_t l = 0; l < num_tokens; ++l) {
    const auto e = embed(stem(tokens[l]), dim);
    std::copy(e.begin(), e.end(), query.values.begin() + static_cast<std::ptrdiff_t>(l * dim));
  }
  Matrix keys(num_patches, dim);
  std::vector<std::set<std::string>> stems(num_patches);
  for (std::size_t k = 0; k < num_patches; ++k) {
    stems[k] = patch_stems(scene, k);
    for (const auto& s : stems[k]) {
      const auto e = embed(s, dim);
      for (std::size_t j = 0; j < dim; ++j) keys(k, j) += e[j];
    }
  }

  // Two heads with different sharpness; keys are used unprojected.
  constexpr std::array<double, 2> kHeadSharpness = {3.0, 6.0};
  const double root_dim = std::sqrt(static_cast<double>(dim));
  Matrix key_proj(dim, dim);
  for (std::size_t j = 0; j < dim; ++j) key_proj(j, j) = 1.0;

  AttentionBundle bundle;
  bundle.layer_index = kLayer;
  bundle.attention = HeadTokenPatchTensor(kHeadSharpness.size(), num_tokens, num_patches);
  bundle.gradient = HeadTokenPatchTensor(kHeadSharpness.size(), num_tokens, num_patches);

  for (std::size_t h = 0; h < kHeadSharpness.size(); ++h) {
    Matrix query_proj(dim, dim);
    for (std::size_t j = 0; j < dim; ++j) query_proj(j, j) = kHeadSharpness[h] * root_dim;
    const Matrix attn = cross_attention(query, keys, query_proj, key_proj);
    for (std::size_t l = 0; l < num_tokens; ++l) {
      for (std::size_t k = 0; k < num_patches; ++k) bundle.attention(h, l, k) = attn(l, k);
    }
  }

  // sim = 1/(H L) sum_h sum_l sum_k W[h,l,k] * (m[l,k] - mean_k m[l,.])
  const double norm = 1.0 / static_cast<double>(kHeadSharpness.size() * num_tokens);
  for (std::size_t l = 0; l < num_tokens; ++l) {
    const std::string s = stem(tokens[l]);
    std::vector<double> overlap(num_patches, 0.0);
    double mean = 0.0;
    if (is_content(tokens[l])) {
      for (std::size_t k = 0; k < num_patches; ++k) {
        overlap[k] = stems[k].contains(s) ? 1.0 : 0.0;
        mean += overlap[k];
      }
      mean /= static_cast<double>(num_patches);
    }
    for (std::size_t h = 0; h < kHeadSharpness.size(); ++h) {
      for (std::size_t k = 0; k < num_patches; ++k) {
        bundle.gradient(h, l, k) = (overlap[k] - mean) * norm;
      }
    }
  }
  return bundle;
}

// ---------------------------------------------------------------------------
// SceneCaptionDecoder

namespace {

constexpr std::array<std::string_view, 8> kDistractors = {
    "dog", "frisbee", "pizza", "umbrella", "giraffe", "laptop", "kite", "traffic cone"};

constexpr double kHallucinationRate = 0.12;
constexpr double kEmptyDecodeRate = 0.02;

std::string article_for(std::string_view noun) {
  if (!noun.empty() && std::string_view("aeiou").find(noun.front()) != std::string_view::npos) {
    return "an";
  }
  return "a";
}

}  // namespace

std::string SceneCaptionDecoder::decode(const Image& image, std::span<const std::size_t> patch_indices,
                                        std::string_view prompt, std::size_t top_k,
                                        std::uint64_t seed) const {
  const Scene scene = Scene::parse(image.payload);
  Rng rng(seed);
  if (rng.uniform01() < kEmptyDecodeRate) return std::string(prompt);

  std::vector<std::size_t> pool(patch_indices.begin(), patch_indices.end());
  if (pool.empty()) {
    for (std::size_t k = 0; k < scene.patches.size(); ++k) pool.push_back(k);
  }

  // Distinct objects in the subset, weighted by how many patches show them.
  std::map<std::string, std::pair<double, std::size_t>> weight;  // object -> (weight, first patch)
  for (std::size_t k : pool) {
    if (k >= scene.patches.size()) throw BackendError("patch index out of range for scene");
    auto [it, inserted] = weight.try_emplace(scene.patches[k].object, 0.0, k);
    it->second.first += 1.0;
  }
  std::vector<std::pair<std::string, std::pair<double, std::size_t>>> ranked(weight.begin(), weight.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second.first > b.second.first; });
  if (top_k > 0 && ranked.size() > top_k) ranked.resize(top_k);

  double total = 0.0;
  for (const auto& r : ranked) total += r.second.first;
  double target = rng.uniform01() * total;
  std::size_t pick = 0;
  for (; pick + 1 < ranked.size(); ++pick) {
    target -= ranked[pick].second.first;
    if (target < 0.0) break;
  }
  const ScenePatch& subject_patch = scene.patches[ranked[pick].second.second];

  std::string object = subject_patch.object;
  std::string attribute = subject_patch.attribute;
  std::string action = subject_patch.action;
  int count = subject_patch.count;
  if (rng.uniform01() < kHallucinationRate) {
    object = std::string(kDistractors[rng.below(kDistractors.size())]);
    attribute.clear();
    action.clear();
    count = 1;
  }

  // A second object from anywhere in the image for relational captions.
  std::string other;
  {
    std::vector<std::string> others;
    for (const auto& p : scene.patches) {
      if (p.object != object && std::find(others.begin(), others.end(), p.object) == others.end()) {
        others.push_back(p.object);
      }
    }
    if (!others.empty()) other = others[rng.below(others.size())];
  }

  std::string noun = attribute.empty() || rng.below(2) == 0 ? object : attribute + " " + object;
  std::string det = count > 1 ? count_word(count) : (rng.below(3) == 0 ? "the" : article_for(noun));
  std::string caption = det + " " + noun;
  switch (rng.below(4)) {
    case 0:
      break;
    case 1:
      if (!action.empty()) caption += " " + action;
      break;
    case 2:
      if (!other.empty()) caption += " near the " + other;
      break;
    default:
      if (!action.empty()) caption += " " + action;
      if (!other.empty()) caption += " by the " + other;
      break;
  }
  return std::string(prompt) + " " + caption;
}

std::string FixedCaptionDecoder::decode(const Image&, std::span<const std::size_t>, std::string_view,
                                        std::size_t, std::uint64_t) const {
  if (outputs_.empty()) return {};
  return outputs_[next_.fetch_add(1) % outputs_.size()];
}

// ---------------------------------------------------------------------------
// ClozeQuestionGenerator

std::string ClozeQuestionGenerator::generate(std::string_view answer, std::string_view context) const {
  const auto ctx = text::words(context);
  const auto ans = text::words(answer);
  if (ans.empty()) return {};

  std::size_t at = ctx.size();
  for (std::size_t i = 0; i + ans.size() <= ctx.size(); ++i) {
    if (std::equal(ans.begin(), ans.end(), ctx.begin() + static_cast<std::ptrdiff_t>(i))) {
      at = i;
      break;
    }
  }
  if (at == ctx.size()) return "What is related to " + text::trim(context) + "?";

  std::vector<std::string> before(ctx.begin(), ctx.begin() + static_cast<std::ptrdiff_t>(at));
  std::vector<std::string> after(ctx.begin() + static_cast<std::ptrdiff_t>(at + ans.size()), ctx.end());
  const bool numeric = LexiconParser::classify(ans.front()) == LexiconParser::WordClass::number;

  const bool only_determiners = std::all_of(before.begin(), before.end(), [](const std::string& w) {
    return w == "a" || w == "an" || w == "the";
  });
  if (numeric) return "How many " + text::join(after, " ") + "?";
  if (only_determiners) {
    if (after.empty()) return "What is this?";
    return "What is " + text::join(after, " ") + "?";
  }
  std::string q = text::join(before, " ") + " what";
  if (!after.empty()) q += " " + text::join(after, " ");
  q.front() = static_cast<char>(std::toupper(static_cast<unsigned char>(q.front())));
  return q + "?";
}

// ---------------------------------------------------------------------------
// OverlapCompletion

namespace {

struct ParsedPrompt {
  std::vector<std::pair<std::string, std::string>> exemplars;
  std::vector<std::string> contexts;
  std::string target;
};

ParsedPrompt parse_prompt(std::string_view prompt) {
  ParsedPrompt out;
  const std::string_view q_marker = "Question: ";
  const std::string_view c_marker = "Contexts: ";
  const std::size_t last_q = prompt.rfind(q_marker);
  if (last_q == std::string_view::npos) {
    out.target = text::trim(prompt);
    return out;
  }
  std::string_view target = prompt.substr(last_q + q_marker.size());
  if (auto a = target.rfind(". Answer:"); a != std::string_view::npos) target = target.substr(0, a);
  out.target = text::trim(target);

  // Walk the body: segments start at either marker.
  std::string_view body = prompt.substr(0, last_q);
  std::size_t pos = 0;
  while (pos < body.size()) {
    const std::size_t nq = body.find(q_marker, pos);
    const std::size_t nc = body.find(c_marker, pos);
    const std::size_t start = std::min(nq, nc);
    if (start == std::string_view::npos) break;
    const bool is_q = start == nq;
    const std::size_t content = start + (is_q ? q_marker.size() : c_marker.size());
    const std::size_t end = std::min({body.find(q_marker, content), body.find(c_marker, content), body.size()});
    std::string_view seg = body.substr(content, end - content);
    if (is_q) {
      const std::size_t a = seg.find(" Answer: ");
      if (a != std::string_view::npos) {
        std::string ans = text::trim(seg.substr(a + 9));
        while (!ans.empty() && ans.back() == '.') ans.pop_back();
        out.exemplars.emplace_back(text::trim(seg.substr(0, a)), ans);
      }
    } else {
      out.contexts.push_back(text::trim(seg));
    }
    pos = end;
  }
  return out;
}

std::size_t overlap(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::size_t n = 0;
  for (const auto& x : a) n += b.contains(x) ? 1 : 0;
  return n;
}

std::string truncate_tokens(std::string_view s, std::size_t max_tokens) {
  std::size_t used = 0;
  bool in_word = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const unsigned char c = static_cast<unsigned char>(s[i]);
    const bool alnum = std::isalnum(c) != 0;
    const bool starts = alnum ? !in_word : !std::isspace(c);
    if (starts) {
      if (used == max_tokens) return std::string(s.substr(0, i));
      ++used;
    }
    in_word = alnum;
  }
  return std::string(s);
}

}  // namespace

std::string OverlapCompletion::complete_greedy(std::string_view prompt, std::size_t max_new_tokens) const {
  const ParsedPrompt parsed = parse_prompt(prompt);
  const auto target = content_stems(parsed.target);
  const std::string target_lower = text::to_lower(parsed.target);
  const bool how_many = target_lower.find("how many") != std::string::npos;

  std::string joined_contexts;
  for (const auto& c : parsed.contexts) joined_contexts += c + " ";

  std::string answer;
  std::size_t best_score = 0;
  std::size_t best_support = 0;
  for (const auto& [q, a] : parsed.exemplars) {
    const auto a_stems = content_stems(a);
    if (a.empty() || (!a_stems.empty() && overlap(a_stems, target) == a_stems.size())) continue;
    std::size_t score = overlap(content_stems(q), target);
    if (how_many && text::to_lower(q).find("how many") != std::string::npos) score += 2;
    const std::size_t support = text::count_phrase(joined_contexts, a);
    if (score > best_score || (score == best_score && score > 0 && support > best_support)) {
      best_score = score;
      best_support = support;
      answer = a;
    }
  }

  if (answer.empty() && !parsed.contexts.empty()) {
    const LexiconParser parser;
    std::size_t best = 0;
    for (const auto& ctx : parsed.contexts) {
      // each context block may hold several period-terminated captions
      std::size_t start = 0;
      while (start < ctx.size()) {
        std::size_t stop = ctx.find('.', start);
        if (stop == std::string::npos) stop = ctx.size();
        const std::string caption = ctx.substr(start, stop - start);
        start = stop + 1;
        const std::size_t score = overlap(content_stems(caption), target);
        if (score <= best) continue;
        for (const auto& phrase : parser.parse(caption)) {
          const auto p_stems = content_stems(phrase.text);
          if (p_stems.empty() || overlap(p_stems, target) == p_stems.size()) continue;
          if (how_many != (phrase.pos == PosClass::number)) continue;
          best = score;
          answer = phrase.text;
          break;
        }
      }
    }
  }
  if (answer.empty() && !parsed.exemplars.empty()) answer = parsed.exemplars.front().second;
  if (answer.empty()) answer = "yes";

  return truncate_tokens(" " + answer + ".\nQuestion: What else is in the picture?", max_new_tokens);
}

std::size_t OverlapCompletion::token_count(std::string_view text_in) const {
  return text::heuristic_token_count(text_in);
}

}  // namespace zsvqa::mock
