#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>

namespace frond {

enum class LogLevel { Quiet = 0, Warn = 1, Info = 2, Debug = 3 };

inline LogLevel& log_level() {
    static LogLevel level = LogLevel::Warn;
    return level;
}

inline LogLevel parse_log_level(const std::string& name) {
    if (name == "quiet") return LogLevel::Quiet;
    if (name == "warn") return LogLevel::Warn;
    if (name == "info") return LogLevel::Info;
    if (name == "debug") return LogLevel::Debug;
    return LogLevel::Warn;
}

// FROND_LOG is the only environment coupling.
inline void init_log_level(const std::string& config_level) {
    log_level() = parse_log_level(config_level);
    if (const char* env = std::getenv("FROND_LOG")) {
        log_level() = parse_log_level(env);
    }
}

inline void log_line(LogLevel level, const char* tag, const std::string& msg) {
    if (log_level() >= level) {
        std::fprintf(stderr, "[%s] %s\n", tag, msg.c_str());
    }
}

inline void log_warn(const std::string& msg) { log_line(LogLevel::Warn, "warn", msg); }
inline void log_info(const std::string& msg) { log_line(LogLevel::Info, "info", msg); }
inline void log_debug(const std::string& msg) { log_line(LogLevel::Debug, "debug", msg); }

}  // namespace frond
