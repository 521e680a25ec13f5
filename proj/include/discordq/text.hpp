#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace discordq::text {

// Byte range [begin, end) into a UTF-8 string.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool operator==(const Span&) const = default;
};

/// Unicode NFC, then every run of whitespace collapsed to one ASCII space,
/// then trimmed. All stored offsets refer to text normalized this way.
std::string normalize(std::string_view raw);

/// Rule-based sentence boundaries: terminal punctuation (. ! ?) optionally
/// followed by closing quotes or brackets, then whitespace or end of text.
/// A period after a known abbreviation or a single-letter initial does not
/// end a sentence. Returned spans exclude surrounding whitespace.
std::vector<Span> split_sentences(std::string_view text);

/// First `count` sentences of `text`, joined by a single space.
std::string lead_sentences(std::string_view text, std::size_t count);

/// Lowercased alphanumeric tokens; punctuation is a separator and
/// apostrophes inside words are dropped ("don't" -> "dont"). Non-ASCII
/// bytes are kept as word characters.
std::vector<std::string> tokenize(std::string_view text);

bool is_stopword(std::string_view token);

/// tokenize() minus stopwords.
std::vector<std::string> content_tokens(std::string_view text);

/// Bag-of-tokens F1 over tokenize(); 1.0 when both sides are empty.
double token_f1(std::string_view a, std::string_view b);

/// Lowercase, punctuation mapped to spaces, whitespace collapsed.
std::string fold(std::string_view text);

std::string to_lower_ascii(std::string_view text);

bool is_abbreviation(std::string_view lowered_token);

/// Number of Unicode code points in a UTF-8 string.
std::size_t codepoint_length(std::string_view utf8);

}  // namespace discordq::text
