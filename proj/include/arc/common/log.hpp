#pragma once

#include <string_view>

namespace arc::log {

// Diagnostics always go to stderr; stdout is reserved for machine output.
void info(std::string_view message);
void warn(std::string_view message);
void set_quiet(bool quiet);

}  // namespace arc::log
