#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace discordq {

enum class StartWord { Why, How, What, Who };

inline constexpr std::array<StartWord, 4> kAllStartWords = {
    StartWord::Why, StartWord::How, StartWord::What, StartWord::Who};

std::string_view to_string(StartWord w);

/// Case-insensitive; nullopt for anything outside the four start words.
std::optional<StartWord> parse_start_word(std::string_view s);

/// True when `question` begins with the start word as a whole word
/// (case-insensitive) and ends with '?'.
bool satisfies_start_word(std::string_view question, StartWord w);

}  // namespace discordq
