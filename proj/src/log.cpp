#include "saad/log.hpp"

#include <cstdlib>
#include <iostream>
#include <string>

namespace saad {

LogLevel log_level() {
    static const LogLevel level = [] {
        const char* raw = std::getenv("SAAD_LOG");
        if (raw == nullptr) return LogLevel::warn;
        const std::string value(raw);
        if (value == "quiet" || value == "0") return LogLevel::quiet;
        if (value == "info") return LogLevel::info;
        if (value == "debug") return LogLevel::debug;
        return LogLevel::warn;
    }();
    return level;
}

namespace {

void emit(LogLevel at_least, std::string_view prefix, std::string_view message) {
    if (log_level() >= at_least)
        std::cerr << prefix << message << '\n';
}

} // namespace

void log_warn(std::string_view message) { emit(LogLevel::warn, "[saad:warn] ", message); }
void log_info(std::string_view message) { emit(LogLevel::info, "[saad:info] ", message); }
void log_debug(std::string_view message) { emit(LogLevel::debug, "[saad:debug] ", message); }

} // namespace saad
