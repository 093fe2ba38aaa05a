#pragma once

#include <string_view>

namespace saad {

// Verbosity is controlled by the SAAD_LOG environment variable:
// "quiet" | "warn" (default) | "info" | "debug".
enum class LogLevel { quiet = 0, warn = 1, info = 2, debug = 3 };

LogLevel log_level();

void log_warn(std::string_view message);
void log_info(std::string_view message);
void log_debug(std::string_view message);

} // namespace saad
