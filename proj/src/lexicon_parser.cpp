#include "zsvqa/lexicon_parser.hpp"

#include <cctype>
#include <string>
#include <unordered_set>

namespace zsvqa {

namespace {

using WordSet = std::unordered_set<std::string_view>;

const WordSet& stop_words() {
  static const WordSet words = {
      // determiners and possessives
      "a", "an", "the", "this", "that", "these", "those", "some", "its", "his", "her", "their",
      "my", "your", "our", "each", "every", "another", "any", "all", "both", "few", "many",
      "several", "much", "more", "most", "other", "such",
      // prepositions
      "of", "in", "on", "at", "with", "by", "for", "from", "to", "into", "onto", "near", "next",
      "behind", "under", "over", "above", "below", "beside", "besides", "between", "through",
      "across", "around", "along", "inside", "outside", "up", "down", "off", "out", "against",
      "toward", "towards", "during", "while", "as", "like", "upon", "within", "without", "beneath",
      "about", "after", "before", "among", "via", "front", "top", "side", "back",
      // conjunctions and pronouns
      "and", "or", "but", "nor", "so", "then", "than", "he", "she", "it", "they", "them", "him",
      "we", "us", "you", "i", "me", "there", "here", "who", "whom", "whose", "which", "what",
      "where", "when", "why", "how", "itself", "themselves",
      // auxiliaries and copulas
      "is", "are", "was", "were", "be", "been", "being", "am", "has", "have", "had", "do", "does",
      "did", "can", "will", "would", "could", "should", "may", "might", "must", "not", "very",
      "too", "also", "just",
      // caption boilerplate
      "picture", "image", "photo", "photograph", "view", "shot", "closeup", "close",
  };
  return words;
}

const WordSet& adjective_words() {
  static const WordSet words = {
      "red", "orange", "yellow", "green", "blue", "purple", "pink", "brown", "black", "white",
      "gray", "grey", "silver", "gold", "golden", "big", "large", "small", "little", "tall",
      "short", "long", "tiny", "huge", "giant", "old", "young", "new", "wooden", "metal",
      "plastic", "empty", "full", "open", "closed", "wet", "dry", "sunny", "cloudy", "dark",
      "bright", "busy", "calm", "clear", "cold", "hot", "warm", "happy", "sad", "pretty",
      "modern", "electric", "fresh", "clean", "dirty", "striped", "round", "square", "high",
      "low", "wide", "narrow", "heavy", "light", "fast", "slow", "quiet", "loud", "rainy",
      "snowy", "foggy", "shiny", "fluffy", "furry", "stormy", "colorful", "beautiful",
      "wonderful", "delicious", "famous", "dangerous",
  };
  return words;
}

const WordSet& verb_words() {
  static const WordSet words = {
      "sits", "sit", "stands", "stand", "holds", "hold", "rides", "ride", "flies", "fly", "plays",
      "play", "eats", "eat", "walks", "walk", "runs", "run", "swims", "swim", "spins", "spin",
      "sails", "sail", "floats", "float", "carries", "carry", "makes", "make", "looks", "look",
      "lies", "lie", "waits", "wait", "drives", "drive", "serves", "serve", "pours", "pour",
      "mixes", "mix", "wears", "wear", "grazes", "graze", "jumps", "jump", "throws", "throw",
      "catches", "catch", "sleeps", "sleep", "reads", "read", "cooks", "cook", "cuts", "cut",
      "shows", "show", "turns", "turn", "glows", "glow", "shines", "shine",
  };
  return words;
}

// -ing / -ed forms that are nouns or adjectives.
const WordSet& suffix_exceptions() {
  static const WordSet words = {
      "building", "buildings", "ceiling", "clothing", "evening", "morning", "king", "ring",
      "thing", "things", "something", "nothing", "everything", "wing", "wings", "string",
      "spring", "swing", "sibling", "icing", "railing", "awning", "pudding", "stocking",
      "bed", "red", "shed", "sled", "speed", "seed", "breed", "weed", "need", "feed", "bread",
      "head", "sled", "hundred", "sacred", "naked", "wicked", "ragged",
  };
  return words;
}

const WordSet& number_words() {
  static const WordSet words = {
      "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
      "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen",
      "nineteen", "twenty", "thirty", "forty", "fifty", "hundred", "dozen",
  };
  return words;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

struct Token {
  std::size_t begin;
  std::size_t end;
  std::string lowered;
  LexiconParser::WordClass cls;
};

}  // namespace

LexiconParser::WordClass LexiconParser::classify(std::string_view w) {
  if (w == "yes" || w == "no") return WordClass::boolean;
  if (all_digits(w) || number_words().contains(w)) return WordClass::number;
  if (stop_words().contains(w)) return WordClass::stop;
  if (adjective_words().contains(w)) return WordClass::adjective;
  if (verb_words().contains(w)) return WordClass::verb;
  if (!suffix_exceptions().contains(w)) {
    if (w.size() >= 5 && (ends_with(w, "ing") || ends_with(w, "ed"))) return WordClass::verb;
    if (w.size() >= 6 && (ends_with(w, "ful") || ends_with(w, "ous"))) return WordClass::adjective;
  }
  return WordClass::noun;
}

std::vector<ParsedPhrase> LexiconParser::parse(std::string_view sentence) const {
  std::vector<Token> tokens;
  for (std::size_t i = 0; i < sentence.size();) {
    if (!std::isalnum(static_cast<unsigned char>(sentence[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < sentence.size()) {
      const unsigned char c = static_cast<unsigned char>(sentence[j]);
      const bool inner_apostrophe = c == '\'' && j + 1 < sentence.size() &&
                                    std::isalnum(static_cast<unsigned char>(sentence[j + 1]));
      if (!std::isalnum(c) && !inner_apostrophe) break;
      ++j;
    }
    Token t{i, j, {}, WordClass::stop};
    for (std::size_t p = i; p < j; ++p) {
      t.lowered.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(sentence[p]))));
    }
    t.cls = classify(t.lowered);
    tokens.push_back(std::move(t));
    i = j;
  }

  auto surface = [&](std::size_t first, std::size_t last) {
    return std::string(sentence.substr(tokens[first].begin, tokens[last].end - tokens[first].begin));
  };

  // Chunks must not cross punctuation: consecutive tokens separated by
  // anything but spaces end the run.
  auto contiguous = [&](std::size_t a, std::size_t b) {
    for (std::size_t p = tokens[a].end; p < tokens[b].begin; ++p) {
      if (sentence[p] != ' ' && sentence[p] != '\t') return false;
    }
    return true;
  };

  std::vector<ParsedPhrase> out;
  for (std::size_t i = 0; i < tokens.size();) {
    const WordClass cls = tokens[i].cls;
    if (cls == WordClass::noun || cls == WordClass::adjective) {
      std::size_t j = i;
      std::size_t last_noun = tokens.size();
      while (j < tokens.size() &&
             (tokens[j].cls == WordClass::noun || tokens[j].cls == WordClass::adjective) &&
             (j == i || contiguous(j - 1, j))) {
        if (tokens[j].cls == WordClass::noun) last_noun = j;
        ++j;
      }
      for (std::size_t k = i; k < j; ++k) {
        if (tokens[k].cls == WordClass::adjective) out.push_back({surface(k, k), PosClass::adjective});
      }
      if (last_noun != tokens.size()) out.push_back({surface(i, last_noun), PosClass::noun});
      i = j;
      continue;
    }
    if (cls == WordClass::verb) out.push_back({surface(i, i), PosClass::verb});
    if (cls == WordClass::number) out.push_back({surface(i, i), PosClass::number});
    if (cls == WordClass::boolean) out.push_back({surface(i, i), PosClass::boolean});
    ++i;
  }
  return out;
}

}  // namespace zsvqa
