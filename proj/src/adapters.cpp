#include "zsvqa/adapters.hpp"

#include <cctype>
#include <string>

#include "zsvqa/errors.hpp"
#include "zsvqa/text.hpp"

namespace zsvqa {

std::string_view to_string(PosClass pos) {
  switch (pos) {
    case PosClass::noun:
      return "noun";
    case PosClass::verb:
      return "verb";
    case PosClass::adjective:
      return "adjective";
    case PosClass::number:
      return "number";
    case PosClass::boolean:
      return "boolean";
  }
  return "noun";
}

PosClass pos_class_from_string(std::string_view name) {
  if (name == "noun") return PosClass::noun;
  if (name == "verb") return PosClass::verb;
  if (name == "adjective") return PosClass::adjective;
  if (name == "number") return PosClass::number;
  if (name == "boolean") return PosClass::boolean;
  throw ClassificationError("unknown part-of-speech class '" + std::string(name) + "'");
}

std::size_t HeuristicTokenCounter::token_count(std::string_view text) const {
  return text::heuristic_token_count(text);
}

std::string clean_answer(std::string_view raw_completion) {
  std::string_view s = raw_completion;
  if (auto nl = s.find_first_of("\r\n"); nl != std::string_view::npos) s = s.substr(0, nl);

  const std::string lowered = text::to_lower(s);
  if (auto q = lowered.find("question:"); q != std::string::npos) s = s.substr(0, q);

  auto strip = [](unsigned char c) { return std::isspace(c) || std::ispunct(c); };
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && strip(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && strip(static_cast<unsigned char>(s[e - 1]))) --e;
  return text::to_lower(s.substr(b, e - b));
}

}  // namespace zsvqa
