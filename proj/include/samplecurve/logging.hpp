#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>

namespace samplecurve {

enum class LogLevel : int { quiet = 0, error = 1, info = 2, debug = 3 };

inline LogLevel log_level_from_string(const std::string& s) {
    if (s == "quiet" || s == "0") return LogLevel::quiet;
    if (s == "error" || s == "1") return LogLevel::error;
    if (s == "debug" || s == "3") return LogLevel::debug;
    return LogLevel::info;
}

inline LogLevel& log_level() {
    static LogLevel level = [] {
        const char* env = std::getenv("SAMPLECURVE_LOG");
        return env ? log_level_from_string(env) : LogLevel::info;
    }();
    return level;
}

inline void log_line(LogLevel level, const std::string& msg) {
    if (static_cast<int>(level) > static_cast<int>(log_level())) return;
    const char* prefix = level == LogLevel::error ? "error" :
                         level == LogLevel::debug ? "debug" : "info";
    std::fprintf(stderr, "[samplecurve %s] %s\n", prefix, msg.c_str());
}

inline void log_error(const std::string& msg) { log_line(LogLevel::error, msg); }
inline void log_info(const std::string& msg) { log_line(LogLevel::info, msg); }
inline void log_debug(const std::string& msg) { log_line(LogLevel::debug, msg); }

} // namespace samplecurve
