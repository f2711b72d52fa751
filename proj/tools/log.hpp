#ifndef QLEAD_TOOLS_LOG_HPP
#define QLEAD_TOOLS_LOG_HPP

#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>

// Diagnostics go to stderr, gated by QC_LOG={error|info|debug}; results go
// to files and stdout only.
namespace qlog {

enum class Level { Error = 0, Info = 1, Debug = 2 };

inline Level threshold() {
    static const Level lvl = [] {
        const char* env = std::getenv("QC_LOG");
        if (env == nullptr)
            return Level::Error;
        if (std::strcmp(env, "debug") == 0)
            return Level::Debug;
        if (std::strcmp(env, "info") == 0)
            return Level::Info;
        return Level::Error;
    }();
    return lvl;
}

inline void vlog(Level lvl, const char* tag, const char* fmt, std::va_list args) {
    if (lvl > threshold())
        return;
    std::fprintf(stderr, "[%s] ", tag);
    std::vfprintf(stderr, fmt, args);
    std::fputc('\n', stderr);
}

inline void error(const char* fmt, ...) {
    std::va_list args;
    va_start(args, fmt);
    vlog(Level::Error, "error", fmt, args);
    va_end(args);
}

inline void info(const char* fmt, ...) {
    std::va_list args;
    va_start(args, fmt);
    vlog(Level::Info, "info", fmt, args);
    va_end(args);
}

inline void debug(const char* fmt, ...) {
    std::va_list args;
    va_start(args, fmt);
    vlog(Level::Debug, "debug", fmt, args);
    va_end(args);
}

} // namespace qlog

#endif
