#include "zsvqa/answers.hpp"

#include <algorithm>
#include <exception>
#include <map>
#include <set>

#include "zsvqa/errors.hpp"
#include "zsvqa/text.hpp"

namespace zsvqa {

namespace {

bool is_boolean_word(const std::string& key) {
  return key == "yes" || key == "no";
}

}  // namespace

std::vector<AnswerCandidate> extract_candidates(const std::vector<Caption>& captions,
                                                const SyntacticParser& parser) {
  if (captions.empty()) throw ArgumentError("cannot extract answers from an empty caption set");

  std::vector<AnswerCandidate> out;
  std::map<std::string, std::size_t> index_of;
  std::vector<std::set<std::size_t>> parsed_in;

  for (std::size_t ci = 0; ci < captions.size(); ++ci) {
    std::vector<ParsedPhrase> phrases;
    try {
      phrases = parser.parse(captions[ci].text);
    } catch (const std::exception& e) {
      throw BackendError("parser failed on caption " + std::to_string(ci) + " ('" +
                         captions[ci].text + "'): " + e.what());
    }
    for (auto& p : phrases) {
      std::string surface = text::trim(p.text);
      std::string key = text::normalize_phrase(surface);
      if (key.empty()) continue;
      auto [it, inserted] = index_of.try_emplace(key, out.size());
      if (inserted) {
        AnswerCandidate c;
        c.text = std::move(surface);
        c.key = key;
        c.pos_class = is_boolean_word(key) ? PosClass::boolean : p.pos;
        c.surface_caption_id = ci;
        out.push_back(std::move(c));
        parsed_in.emplace_back();
      }
      parsed_in[it->second].insert(ci);
    }
  }

  for (std::size_t i = 0; i < out.size(); ++i) {
    std::set<std::size_t> ids = parsed_in[i];
    for (std::size_t ci = 0; ci < captions.size(); ++ci) {
      if (text::contains_phrase(captions[ci].text, out[i].key)) ids.insert(ci);
    }
    out[i].source_caption_ids.assign(ids.begin(), ids.end());
    out[i].frequency = ids.size();
  }
  return out;
}

std::vector<AnswerCandidate> rank_by_frequency(std::vector<AnswerCandidate> candidates,
                                               FrequencyOrder order) {
  std::stable_sort(candidates.begin(), candidates.end(),
                   [order](const AnswerCandidate& a, const AnswerCandidate& b) {
                     if (a.frequency != b.frequency) {
                       return order == FrequencyOrder::max_first ? a.frequency > b.frequency
                                                                 : a.frequency < b.frequency;
                     }
                     if (a.key != b.key) return a.key < b.key;
                     return a.text < b.text;
                   });
  return candidates;
}

}  // namespace zsvqa
