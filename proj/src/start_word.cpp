#include "discordq/start_word.hpp"

#include "discordq/text.hpp"

namespace discordq {

std::string_view to_string(StartWord w) {
  switch (w) {
    case StartWord::Why: return "Why";
    case StartWord::How: return "How";
    case StartWord::What: return "What";
    case StartWord::Who: return "Who";
  }
  return "What";
}

std::optional<StartWord> parse_start_word(std::string_view s) {
  auto lowered = text::to_lower_ascii(s);
  for (auto w : kAllStartWords)
    if (text::to_lower_ascii(to_string(w)) == lowered) return w;
  return std::nullopt;
}

bool satisfies_start_word(std::string_view q, StartWord w) {
  auto word = to_string(w);
  if (q.size() < word.size() + 1 || q.back() != '?') return false;
  if (text::to_lower_ascii(q.substr(0, word.size())) != text::to_lower_ascii(word))
    return false;
  char next = q[word.size()];
  bool letter = (next >= 'a' && next <= 'z') || (next >= 'A' && next <= 'Z');
  return !letter;
}

}  // namespace discordq
