#include "zsvqa/eval.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>
#include <unordered_map>

#include "zsvqa/errors.hpp"
#include "zsvqa/text.hpp"

namespace zsvqa {

namespace {

// Rule tables of the official VQA accuracy evaluator.

const std::unordered_map<std::string_view, std::string_view>& contractions() {
  static const std::unordered_map<std::string_view, std::string_view> table = {
      {"aint", "ain't"}, {"arent", "aren't"}, {"cant", "can't"}, {"couldve", "could've"},
      {"couldnt", "couldn't"}, {"couldn'tve", "couldn't've"}, {"couldnt've", "couldn't've"},
      {"didnt", "didn't"}, {"doesnt", "doesn't"}, {"dont", "don't"}, {"hadnt", "hadn't"},
      {"hadnt've", "hadn't've"}, {"hadn'tve", "hadn't've"}, {"hasnt", "hasn't"},
      {"havent", "haven't"}, {"hed", "he'd"}, {"hed've", "he'd've"}, {"he'dve", "he'd've"},
      {"hes", "he's"}, {"howd", "how'd"}, {"howll", "how'll"}, {"hows", "how's"},
      {"Id've", "I'd've"}, {"I'dve", "I'd've"}, {"Im", "I'm"}, {"Ive", "I've"},
      {"isnt", "isn't"}, {"itd", "it'd"}, {"itd've", "it'd've"}, {"it'dve", "it'd've"},
      {"itll", "it'll"}, {"let's", "let's"}, {"maam", "ma'am"}, {"mightnt", "mightn't"},
      {"mightnt've", "mightn't've"}, {"mightn'tve", "mightn't've"}, {"mightve", "might've"},
      {"mustnt", "mustn't"}, {"mustve", "must've"}, {"neednt", "needn't"}, {"notve", "not've"},
      {"oclock", "o'clock"}, {"oughtnt", "oughtn't"}, {"ow's'at", "'ow's'at"},
      {"'ows'at", "'ow's'at"}, {"'ow'sat", "'ow's'at"}, {"shant", "shan't"},
      {"shed've", "she'd've"}, {"she'dve", "she'd've"}, {"she's", "she's"},
      {"shouldve", "should've"}, {"shouldnt", "shouldn't"}, {"shouldnt've", "shouldn't've"},
      {"shouldn'tve", "shouldn't've"}, {"somebody'd", "somebodyd"},
      {"somebodyd've", "somebody'd've"}, {"somebody'dve", "somebody'd've"},
      {"somebodyll", "somebody'll"}, {"somebodys", "somebody's"}, {"someoned", "someone'd"},
      {"someoned've", "someone'd've"}, {"someone'dve", "someone'd've"},
      {"someonell", "someone'll"}, {"someones", "someone's"}, {"somethingd", "something'd"},
      {"somethingd've", "something'd've"}, {"something'dve", "something'd've"},
      {"somethingll", "something'll"}, {"thats", "that's"}, {"thered", "there'd"},
      {"thered've", "there'd've"}, {"there'dve", "there'd've"}, {"therere", "there're"},
      {"theres", "there's"}, {"theyd", "they'd"}, {"theyd've", "they'd've"},
      {"they'dve", "they'd've"}, {"theyll", "they'll"}, {"theyre", "they're"},
      {"theyve", "they've"}, {"twas", "'twas"}, {"wasnt", "wasn't"}, {"wed've", "we'd've"},
      {"we'dve", "we'd've"}, {"weve", "we've"}, {"werent", "weren't"}, {"whatll", "what'll"},
      {"whatre", "what're"}, {"whats", "what's"}, {"whatve", "what've"}, {"whens", "when's"},
      {"whered", "where'd"}, {"wheres", "where's"}, {"whereve", "where've"}, {"whod", "who'd"},
      {"whod've", "who'd've"}, {"who'dve", "who'd've"}, {"wholl", "who'll"}, {"whos", "who's"},
      {"whove", "who've"}, {"whyll", "why'll"}, {"whyre", "why're"}, {"whys", "why's"},
      {"wont", "won't"}, {"wouldve", "would've"}, {"wouldnt", "wouldn't"},
      {"wouldnt've", "wouldn't've"}, {"wouldn'tve", "wouldn't've"}, {"yall", "y'all"},
      {"yall'll", "y'all'll"}, {"y'allll", "y'all'll"}, {"yall'd've", "y'all'd've"},
      {"y'alld've", "y'all'd've"}, {"y'all'dve", "y'all'd've"}, {"youd", "you'd"},
      {"youd've", "you'd've"}, {"you'dve", "you'd've"}, {"youll", "you'll"},
      {"youre", "you're"}, {"youve", "you've"},
  };
  return table;
}

const std::unordered_map<std::string_view, std::string_view>& number_words() {
  static const std::unordered_map<std::string_view, std::string_view> table = {
      {"none", "0"}, {"zero", "0"}, {"one", "1"},   {"two", "2"},   {"three", "3"}, {"four", "4"},
      {"five", "5"}, {"six", "6"},  {"seven", "7"}, {"eight", "8"}, {"nine", "9"},  {"ten", "10"},
  };
  return table;
}

constexpr std::string_view kPunctuation = ";/[]\"{}()=+\\_-><@`,?!";

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

// digit, comma, digit anywhere in the text
bool has_digit_comma_digit(std::string_view s) {
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    if (s[i] == ',' && is_digit(s[i - 1]) && is_digit(s[i + 1])) return true;
  }
  return false;
}

std::string process_punctuation(std::string_view in) {
  std::string out(in);
  const bool comma_number = has_digit_comma_digit(in);
  for (char p : kPunctuation) {
    const std::string p_space = std::string(1, p) + " ";
    const std::string space_p = " " + std::string(1, p);
    const bool remove = in.find(p_space) != std::string_view::npos ||
                        in.find(space_p) != std::string_view::npos || comma_number;
    std::string next;
    next.reserve(out.size());
    for (char c : out) {
      if (c != p) {
        next.push_back(c);
      } else if (!remove) {
        next.push_back(' ');
      }
    }
    out = std::move(next);
  }
  // a period not followed by a digit is dropped
  std::string stripped;
  stripped.reserve(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] == '.' && !(i + 1 < out.size() && is_digit(out[i + 1]))) continue;
    stripped.push_back(out[i]);
  }
  return stripped;
}

std::string process_digit_article(std::string_view in) {
  std::istringstream ss(text::to_lower(in));
  std::vector<std::string> kept;
  std::string word;
  while (ss >> word) {
    if (auto it = number_words().find(word); it != number_words().end()) word = it->second;
    if (word == "a" || word == "an" || word == "the") continue;
    kept.push_back(word);
  }
  for (auto& w : kept) {
    if (auto it = contractions().find(w); it != contractions().end()) w = it->second;
  }
  return text::join(kept, " ");
}

}  // namespace

std::string normalize_vqa_answer(std::string_view answer) {
  std::string s(answer);
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\t', ' ');
  s = text::trim(s);
  return process_digit_article(process_punctuation(s));
}

double vqa_score(std::string_view prediction, const std::vector<std::string>& ground_truths) {
  if (ground_truths.empty()) throw DataError("vqa_score needs at least one ground-truth answer");
  const std::string pred = normalize_vqa_answer(prediction);
  if (pred.empty()) return 0.0;
  std::size_t matches = 0;
  for (const auto& gt : ground_truths) {
    if (normalize_vqa_answer(gt) == pred) ++matches;
  }
  return std::min(1.0, static_cast<double>(matches) / 3.0);
}

std::optional<double> answer_hit_rate(const std::vector<ExemplarQA>& exemplars,
                                      const std::vector<std::string>& ground_truths) {
  if (exemplars.empty()) return std::nullopt;
  std::set<std::string> truths;
  for (const auto& gt : ground_truths) truths.insert(normalize_vqa_answer(gt));
  std::size_t hits = 0;
  for (const auto& qa : exemplars) {
    const std::string a = normalize_vqa_answer(qa.answer);
    if (!a.empty() && truths.contains(a)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(exemplars.size());
}

std::size_t ground_truth_occurrences(std::string_view exemplar_section,
                                     const std::vector<std::string>& ground_truths) {
  std::set<std::string> distinct;
  for (const auto& gt : ground_truths) {
    std::string g = text::normalize_phrase(gt);
    if (!g.empty()) distinct.insert(std::move(g));
  }
  std::size_t hits = 0;
  for (const auto& g : distinct) hits += text::count_phrase(exemplar_section, g);
  return hits;
}

std::optional<double> answer_noise_rate(std::string_view exemplar_section,
                                        const std::vector<std::string>& ground_truths,
                                        const TokenCounter& tokenizer) {
  const std::size_t tokens = tokenizer.token_count(exemplar_section);
  if (tokens == 0) return std::nullopt;
  return static_cast<double>(ground_truth_occurrences(exemplar_section, ground_truths)) /
         static_cast<double>(tokens);
}

}  // namespace zsvqa
