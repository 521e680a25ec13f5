#include "discordq/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <cctype>
#include <iterator>
#include <mutex>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "discordq/errors.hpp"

namespace discordq::text {
namespace {

constexpr std::string_view kAbbreviationData =
#include "abbreviations.inc"
    ;

const std::unordered_set<std::string>& abbreviations() {
  static const auto* set = [] {
    auto* out = new std::unordered_set<std::string>();
    std::istringstream in{std::string(kAbbreviationData)};
    std::string line;
    while (std::getline(in, line)) {
      auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      auto last = line.find_last_not_of(" \t\r");
      out->insert(to_lower_ascii(line.substr(first, last - first + 1)));
    }
    return out;
  }();
  return *set;
}

// Stopwords for content-token overlap. Question words are included so
// they never count as evidence.
constexpr std::string_view kStopwords[] = {
    "a",       "about",   "above",  "after",  "again",   "against", "all",
    "am",      "an",      "and",    "any",    "are",     "as",      "at",
    "be",      "because", "been",   "before", "being",   "below",   "between",
    "both",    "but",     "by",     "can",    "could",   "did",     "do",
    "does",    "doing",   "down",   "during", "each",    "few",     "for",
    "from",    "further", "had",    "has",    "have",    "having",  "he",
    "her",     "here",    "hers",   "herself", "him",    "himself", "his",
    "how",     "i",       "if",     "in",     "into",    "is",      "it",
    "its",     "itself",  "just",   "me",     "more",    "most",    "my",
    "myself",  "no",      "nor",    "not",    "now",     "of",      "off",
    "on",      "once",    "only",   "or",     "other",   "our",     "ours",
    "out",     "over",    "own",    "said",   "same",    "says",    "she",
    "should",  "so",      "some",   "such",   "than",    "that",    "the",
    "their",   "them",    "then",   "there",  "these",   "they",    "this",
    "those",   "through", "to",     "too",    "under",   "until",   "up",
    "very",    "was",     "we",     "were",   "what",    "when",    "where",
    "which",   "while",   "who",    "whom",   "why",     "will",    "with",
    "would",   "you",     "your",   "also",   "s",       "t",       "new",
    "one",     "two"};

bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z') || c >= 0x80;
}

bool is_closer(char c) {
  return c == '"' || c == '\'' || c == ')' || c == ']';
}

bool is_space(char c) { return c == ' '; }

// Token immediately before position `dot` (exclusive), as the run of
// non-space bytes, stripped of leading punctuation and lowercased.
std::string token_before(std::string_view s, std::size_t dot) {
  std::size_t start = dot;
  while (start > 0 && !is_space(s[start - 1])) --start;
  std::string tok(s.substr(start, dot - start));
  std::size_t lead = 0;
  while (lead < tok.size() && !is_word_byte(static_cast<unsigned char>(tok[lead])))
    ++lead;
  return to_lower_ascii(tok.substr(lead));
}

}  // namespace

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

bool is_abbreviation(std::string_view lowered) {
  return abbreviations().contains(std::string(lowered));
}

std::string normalize(std::string_view raw) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
  icu::UnicodeString src = icu::UnicodeString::fromUTF8(
      icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
  icu::UnicodeString composed = nfc->normalize(src, status);
  if (U_FAILURE(status)) throw InputError("text normalization failed");
  std::string utf8;
  composed.toUTF8String(utf8);

  std::string out;
  out.reserve(utf8.size());
  bool pending_space = false;
  int32_t i = 0;
  const auto* bytes = reinterpret_cast<const uint8_t*>(utf8.data());
  const auto len = static_cast<int32_t>(utf8.size());
  while (i < len) {
    int32_t start = i;
    UChar32 cp;
    U8_NEXT(bytes, i, len, cp);
    if (cp >= 0 && u_isUWhiteSpace(cp)) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty()) out.push_back(' ');
    pending_space = false;
    if (cp < 0) {
      out += "\xEF\xBF\xBD";  // U+FFFD for invalid sequences
    } else {
      out.append(utf8, static_cast<std::size_t>(start),
                 static_cast<std::size_t>(i - start));
    }
  }
  return out;
}

std::vector<Span> split_sentences(std::string_view s) {
  std::vector<Span> out;
  std::size_t begin = 0;
  auto skip_spaces = [&](std::size_t p) {
    while (p < s.size() && is_space(s[p])) ++p;
    return p;
  };
  begin = skip_spaces(0);
  std::size_t i = begin;
  while (i < s.size()) {
    char c = s[i];
    if (c != '.' && c != '!' && c != '?') {
      ++i;
      continue;
    }
    std::size_t end = i + 1;
    while (end < s.size() && (s[end] == '.' || s[end] == '!' || s[end] == '?'))
      ++end;
    while (end < s.size() && is_closer(s[end])) ++end;
    bool boundary = end == s.size() || is_space(s[end]);
    if (boundary && c == '.') {
      std::string tok = token_before(s, i);
      if (!tok.empty() && tok.back() == '.') tok.pop_back();
      bool initial = tok.size() == 1 && std::isalpha(static_cast<unsigned char>(tok[0]));
      if (initial || is_abbreviation(tok)) boundary = false;
    }
    if (boundary && end < s.size()) {
      // Next sentence must not start lowercase ("e.g. it", "3 p.m. local").
      std::size_t next = skip_spaces(end);
      if (next < s.size() && s[next] >= 'a' && s[next] <= 'z') boundary = false;
    }
    if (!boundary) {
      i = end;
      continue;
    }
    out.push_back({begin, end});
    begin = skip_spaces(end);
    i = begin;
  }
  if (begin < s.size()) {
    std::size_t end = s.size();
    while (end > begin && is_space(s[end - 1])) --end;
    if (end > begin) out.push_back({begin, end});
  }
  return out;
}

std::string lead_sentences(std::string_view s, std::size_t count) {
  auto spans = split_sentences(s);
  if (spans.empty()) return {};
  std::size_t last = std::min(count, spans.size());
  return std::string(s.substr(spans.front().begin,
                              spans[last - 1].end - spans.front().begin));
}

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (std::size_t i = 0; i < s.size(); ++i) {
    auto c = static_cast<unsigned char>(s[i]);
    if (is_word_byte(c)) {
      cur.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a')
                                         : static_cast<char>(c));
    } else if (c == '\'' && !cur.empty() && i + 1 < s.size() &&
               is_word_byte(static_cast<unsigned char>(s[i + 1]))) {
      // intra-word apostrophe
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

bool is_stopword(std::string_view token) {
  return std::find(std::begin(kStopwords), std::end(kStopwords), token) !=
         std::end(kStopwords);
}

std::vector<std::string> content_tokens(std::string_view s) {
  auto toks = tokenize(s);
  std::erase_if(toks, [](const std::string& t) { return is_stopword(t); });
  return toks;
}

double token_f1(std::string_view a, std::string_view b) {
  auto ta = tokenize(a);
  auto tb = tokenize(b);
  if (ta.empty() && tb.empty()) return 1.0;
  if (ta.empty() || tb.empty()) return 0.0;
  std::unordered_map<std::string, int> counts;
  for (const auto& t : ta) ++counts[t];
  int common = 0;
  for (const auto& t : tb) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return 0.0;
  double precision = static_cast<double>(common) / static_cast<double>(ta.size());
  double recall = static_cast<double>(common) / static_cast<double>(tb.size());
  return 2.0 * precision * recall / (precision + recall);
}

std::string fold(std::string_view s) {
  std::string out;
  for (const auto& tok : tokenize(s)) {
    if (!out.empty()) out.push_back(' ');
    out += tok;
  }
  return out;
}

std::size_t codepoint_length(std::string_view utf8) {
  std::size_t n = 0;
  for (char c : utf8)
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  return n;
}

}  // namespace discordq::text
