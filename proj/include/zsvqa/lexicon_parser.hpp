#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "zsvqa/adapters.hpp"

namespace zsvqa {

// Dependency-free shallow chunker for short captions. Closed-class words
// (determiners, prepositions, pronouns, auxiliaries) delimit chunks; a small
// adjective lexicon plus suffix rules separate modifiers and verbs from nouns.
//
// Emits noun phrases (maximal adjective/noun runs ending in a noun), single
// verbs, single adjectives, numbers, and yes/no booleans. Surface forms are
// exact substrings of the input.
class LexiconParser final : public SyntacticParser {
 public:
  std::vector<ParsedPhrase> parse(std::string_view sentence) const override;
  std::string version() const override { return "lexicon-chunker/1"; }

  enum class WordClass { stop, noun, verb, adjective, number, boolean };
  static WordClass classify(std::string_view lowered_word);
};

}  // namespace zsvqa
