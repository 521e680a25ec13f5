#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace discordq {

using Timestamp = std::chrono::sys_seconds;

/// Accepts YYYY-MM-DDTHH:MM:SS with optional fractional seconds and a
/// trailing Z or +HH:MM / -HH:MM offset. Throws ParseError.
Timestamp parse_timestamp(std::string_view iso);

/// Always rendered as YYYY-MM-DDTHH:MM:SSZ.
std::string format_timestamp(Timestamp t);

}  // namespace discordq
