#pragma once

#include <string>
#include <string_view>

namespace discordq::detail {

std::string sha256_hex(std::string_view data);

}  // namespace discordq::detail
