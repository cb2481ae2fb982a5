#pragma once

#include <cstdio>

namespace sepmel {

// Log level from SM_LOG: off|error|warn|info|debug (default warn). Stderr only,
// so machine-readable outputs on stdout/files stay byte-stable.
enum class LogLevel { off = 0, error, warn, info, debug };

LogLevel log_level();

template <class... Args>
void log_at(LogLevel lvl, const char* tag, const char* fmt, Args... args) {
    if (static_cast<int>(lvl) > static_cast<int>(log_level())) return;
    std::fprintf(stderr, "[sepmel %s] ", tag);
    std::fprintf(stderr, fmt, args...);
    std::fprintf(stderr, "\n");
}

#define SM_WARN(...) ::sepmel::log_at(::sepmel::LogLevel::warn, "warn", __VA_ARGS__)
#define SM_INFO(...) ::sepmel::log_at(::sepmel::LogLevel::info, "info", __VA_ARGS__)
#define SM_DEBUG(...) ::sepmel::log_at(::sepmel::LogLevel::debug, "debug", __VA_ARGS__)

}  // namespace sepmel
