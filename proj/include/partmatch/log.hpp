#pragma once

#include <string>

namespace partmatch {

/// Log severity, ordered from most to least severe.
enum class LogLevel { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

/// Threshold read from the PARTMATCH_LOG environment variable on first use.
/// Unset or unrecognized values default to warn.
LogLevel log_threshold();

/// Writes a single line to stderr if `level` is at or above the threshold.
void log_message(LogLevel level, const std::string& message);

void log_error(const std::string& message);
void log_warn(const std::string& message);
void log_info(const std::string& message);
void log_debug(const std::string& message);

}  // namespace partmatch
