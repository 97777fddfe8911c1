#pragma once

#include <map>
#include <string>
#include <string_view>

namespace arc {

/// `key = value` lines; blank lines and `#` comments (also trailing) are skipped, keys and
/// values are trimmed. Duplicate keys and lines without `=` raise ConfigError.
std::map<std::string, std::string> parse_key_values(std::string_view text);

double parse_real(std::string_view key, std::string_view value);
long long parse_integer(std::string_view key, std::string_view value);
bool parse_bool(std::string_view key, std::string_view value);

}  // namespace arc
