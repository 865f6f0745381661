#pragma once

#include <string_view>

namespace jointgen {

enum class LogLevel { debug, info, warning, error, quiet };

/// Process-wide threshold; messages below it are dropped. Default: info.
void set_log_level(LogLevel level);
LogLevel log_level();

/// Writes "[level] message" to stderr.
void log(LogLevel level, std::string_view message);
inline void log_info(std::string_view message) { log(LogLevel::info, message); }
inline void log_warning(std::string_view message) { log(LogLevel::warning, message); }

}  // namespace jointgen
