#include "amflow/log.hpp"

#include <cstdarg>
#include <cstdlib>
#include <cstring>

namespace amflow::log {

namespace {

Level parse_env() {
    const char* env = std::getenv("AMFLOW_LOG");
    if (env == nullptr) return Level::kWarn;
    if (std::strcmp(env, "error") == 0) return Level::kError;
    if (std::strcmp(env, "warn") == 0) return Level::kWarn;
    if (std::strcmp(env, "info") == 0) return Level::kInfo;
    if (std::strcmp(env, "debug") == 0) return Level::kDebug;
    return Level::kWarn;
}

const char* tag(Level lv) {
    switch (lv) {
        case Level::kError: return "error";
        case Level::kWarn: return "warn";
        case Level::kInfo: return "info";
        case Level::kDebug: return "debug";
    }
    return "?";
}

} // namespace

Level level() {
    static const Level lv = parse_env();
    return lv;
}

bool enabled(Level lv) { return static_cast<int>(lv) <= static_cast<int>(level()); }

void write(Level lv, const char* fmt, ...) {
    if (!enabled(lv)) return;
    std::fprintf(stderr, "[amflow %s] ", tag(lv));
    va_list args;
    va_start(args, fmt);
    std::vfprintf(stderr, fmt, args);
    va_end(args);
    std::fputc('\n', stderr);
}

} // namespace amflow::log
