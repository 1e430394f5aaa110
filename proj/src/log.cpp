#include "partmatch/log.hpp"

#include <cstdlib>
#include <iostream>

namespace partmatch {

namespace {

LogLevel parse_threshold() {
    const char* raw = std::getenv("PARTMATCH_LOG");
    if (raw == nullptr) {
        return LogLevel::kWarn;
    }
    const std::string value(raw);
    if (value == "error") return LogLevel::kError;
    if (value == "warn") return LogLevel::kWarn;
    if (value == "info") return LogLevel::kInfo;
    if (value == "debug") return LogLevel::kDebug;
    return LogLevel::kWarn;
}

const char* level_tag(LogLevel level) {
    switch (level) {
        case LogLevel::kError: return "error";
        case LogLevel::kWarn: return "warn";
        case LogLevel::kInfo: return "info";
        case LogLevel::kDebug: return "debug";
    }
    return "warn";
}

}  // namespace

LogLevel log_threshold() {
    static const LogLevel threshold = parse_threshold();
    return threshold;
}

void log_message(LogLevel level, const std::string& message) {
    if (static_cast<int>(level) > static_cast<int>(log_threshold())) {
        return;
    }
    std::cerr << "[partmatch:" << level_tag(level) << "] " << message << "\n";
}

void log_error(const std::string& message) { log_message(LogLevel::kError, message); }
void log_warn(const std::string& message) { log_message(LogLevel::kWarn, message); }
void log_info(const std::string& message) { log_message(LogLevel::kInfo, message); }
void log_debug(const std::string& message) { log_message(LogLevel::kDebug, message); }

}  // namespace partmatch
