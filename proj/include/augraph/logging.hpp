#pragma once

#include <sstream>
#include <string>

namespace augraph {

enum class LogLevel { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

// Level comes from the AUGRAPH_LOG environment variable
// (error|warn|info|debug), default info.
LogLevel log_level();
void set_log_level(LogLevel level);
bool log_enabled(LogLevel level);
void log_msg(LogLevel level, const std::string& msg);

namespace detail {
template <typename... Args>
void log_fmt(LogLevel level, Args&&... args) {
  if (!log_enabled(level)) return;
  std::ostringstream os;
  (os << ... << args);
  log_msg(level, os.str());
}
}  // namespace detail

}  // namespace augraph

#define AUG_ERROR(...) ::augraph::detail::log_fmt(::augraph::LogLevel::kError, __VA_ARGS__)
#define AUG_WARN(...) ::augraph::detail::log_fmt(::augraph::LogLevel::kWarn, __VA_ARGS__)
#define AUG_INFO(...) ::augraph::detail::log_fmt(::augraph::LogLevel::kInfo, __VA_ARGS__)
#define AUG_DEBUG(...) ::augraph::detail::log_fmt(::augraph::LogLevel::kDebug, __VA_ARGS__)
