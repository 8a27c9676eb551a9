#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace zsvqa::text {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

// Lowercase and collapse every whitespace run into a single space.
std::string normalize_phrase(std::string_view s);

// Lowercased alphanumeric words (apostrophes kept inside words).
std::vector<std::string> words(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// True when `needle` occurs in `haystack` on word boundaries. Both are
// compared after normalize_phrase.
bool contains_phrase(std::string_view haystack, std::string_view needle);

// Number of non-overlapping word-boundary occurrences of `needle`.
std::size_t count_phrase(std::string_view haystack, std::string_view needle);

// Heuristic subword-free token count: every alphanumeric run is one token and
// every other non-space character is one token.
std::size_t heuristic_token_count(std::string_view s);

bool starts_with_ci(std::string_view s, std::string_view prefix);

}  // namespace zsvqa::text
