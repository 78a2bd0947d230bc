#pragma once

#include <charconv>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"

namespace qdfg {

using json = nlohmann::json;

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input data (trace lines, JSON documents, CSV rows).
struct ParseError : Error {
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what)
        , line(line) {}
    std::size_t line;
};

/// A mapped call that cannot be interpreted (missing or invalid argument).
struct InterpretError : Error {
    using Error::Error;
};

/// Violated operation precondition (absent node, wrong entity type, ...).
struct DomainError : Error {
    using Error::Error;
};

/// Invalid configuration (bad probabilities, empty pools, ...).
struct ConfigError : Error {
    using Error::Error;
};

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

namespace detail {

inline LogLevel log_level_from_env() {
    const char* v = std::getenv("QDFG_LOG_LEVEL");
    if (!v) return LogLevel::Warn;
    std::string_view s(v);
    if (s == "error") return LogLevel::Error;
    if (s == "warn") return LogLevel::Warn;
    if (s == "info") return LogLevel::Info;
    if (s == "debug") return LogLevel::Debug;
    return LogLevel::Warn;
}

inline std::mutex& log_mutex() {
    static std::mutex m;
    return m;
}

} // namespace detail

inline LogLevel log_level() {
    static const LogLevel level = detail::log_level_from_env();
    return level;
}

inline void log(LogLevel level, std::string_view msg) {
    if (static_cast<int>(level) > static_cast<int>(log_level())) return;
    static constexpr const char* names[] = {"error", "warn", "info", "debug"};
    std::lock_guard<std::mutex> lock(detail::log_mutex());
    std::cerr << "qdfg [" << names[static_cast<int>(level)] << "] " << msg << "\n";
}

inline void log_warn(std::string_view msg) { log(LogLevel::Warn, msg); }
inline void log_info(std::string_view msg) { log(LogLevel::Info, msg); }
inline void log_debug(std::string_view msg) { log(LogLevel::Debug, msg); }

/// Shortest decimal form that round-trips back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

} // namespace qdfg
