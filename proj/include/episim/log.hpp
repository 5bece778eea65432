#pragma once

#include <fmt/format.h>
#include <iostream>
#include <string_view>

namespace episim {

enum class LogLevel { critical = 0, error = 1, warning = 2, info = 3, debug = 4 };

LogLevel log_level() noexcept;
void set_log_level(LogLevel level) noexcept;

// Parses one of: critical, error, warning, info, debug. Returns false on an
// unknown name and leaves `out` untouched.
bool parse_log_level(std::string_view name, LogLevel& out) noexcept;

void log_message(LogLevel level, std::string_view message);

template <typename... Args>
void log_debug(fmt::format_string<Args...> fmt, Args&&... args) {
  if (log_level() >= LogLevel::debug)
    log_message(LogLevel::debug, fmt::format(fmt, std::forward<Args>(args)...));
}

template <typename... Args>
void log_info(fmt::format_string<Args...> fmt, Args&&... args) {
  if (log_level() >= LogLevel::info)
    log_message(LogLevel::info, fmt::format(fmt, std::forward<Args>(args)...));
}

template <typename... Args>
void log_warning(fmt::format_string<Args...> fmt, Args&&... args) {
  if (log_level() >= LogLevel::warning)
    log_message(LogLevel::warning, fmt::format(fmt, std::forward<Args>(args)...));
}

template <typename... Args>
void log_error(fmt::format_string<Args...> fmt, Args&&... args) {
  if (log_level() >= LogLevel::error)
    log_message(LogLevel::error, fmt::format(fmt, std::forward<Args>(args)...));
}

}  // namespace episim
