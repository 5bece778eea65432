#include "episim/log.hpp"

#include <atomic>

namespace episim {

namespace {

std::atomic<LogLevel> g_level{LogLevel::warning};

constexpr std::string_view level_tag(LogLevel level) noexcept {
  switch (level) {
    case LogLevel::critical: return "critical";
    case LogLevel::error: return "error";
    case LogLevel::warning: return "warning";
    case LogLevel::info: return "info";
    case LogLevel::debug: return "debug";
  }
  return "?";
}

}  // namespace

LogLevel log_level() noexcept { return g_level.load(std::memory_order_relaxed); }

void set_log_level(LogLevel level) noexcept {
  g_level.store(level, std::memory_order_relaxed);
}

bool parse_log_level(std::string_view name, LogLevel& out) noexcept {
  for (LogLevel level : {LogLevel::critical, LogLevel::error, LogLevel::warning,
                         LogLevel::info, LogLevel::debug}) {
    if (name == level_tag(level)) {
      out = level;
      return true;
    }
  }
  return false;
}

void log_message(LogLevel level, std::string_view message) {
  std::clog << "[" << level_tag(level) << "] " << message << "\n";
}

}  // namespace episim
