#include "zsvqa/text.hpp"

#include <cctype>

namespace zsvqa::text {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string normalize_phrase(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    const bool inner_apostrophe =
        c == '\'' && !cur.empty() && i + 1 < s.size() && is_alnum(s[i + 1]);
    if (is_alnum(c) || inner_apostrophe) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

namespace {

// Occurrences of the word sequence `needle` inside `hay`, non-overlapping.
std::size_t count_word_seq(const std::vector<std::string>& hay, const std::vector<std::string>& needle,
                           bool stop_at_first) {
  if (needle.empty() || needle.size() > hay.size()) return 0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i + needle.size() <= hay.size();) {
    bool match = true;
    for (std::size_t j = 0; j < needle.size(); ++j) {
      if (hay[i + j] != needle[j]) {
        match = false;
        break;
      }
    }
    if (match) {
      ++hits;
      if (stop_at_first) return hits;
      i += needle.size();
    } else {
      ++i;
    }
  }
  return hits;
}

}  // namespace

bool contains_phrase(std::string_view haystack, std::string_view needle) {
  return count_word_seq(words(haystack), words(needle), true) > 0;
}

std::size_t count_phrase(std::string_view haystack, std::string_view needle) {
  return count_word_seq(words(haystack), words(needle), false);
}

std::size_t heuristic_token_count(std::string_view s) {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : s) {
    if (is_alnum(c)) {
      if (!in_word) ++n;
      in_word = true;
    } else {
      in_word = false;
      if (!is_space(c)) ++n;
    }
  }
  return n;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) !=
        std::tolower(static_cast<unsigned char>(prefix[i]))) {
      return false;
    }
  }
  return true;
}

}  // namespace zsvqa::text
