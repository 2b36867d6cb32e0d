#pragma once

#include <cstdio>

namespace amflow::log {

enum class Level { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

// Current verbosity, initialized once from the AMFLOW_LOG environment
// variable (error|warn|info|debug); defaults to warn.
Level level();

bool enabled(Level lv);

void write(Level lv, const char* fmt, ...)
#if defined(__GNUC__)
    __attribute__((format(printf, 2, 3)))
#endif
    ;

} // namespace amflow::log

#define AMFLOW_LOG_ERROR(...) ::amflow::log::write(::amflow::log::Level::kError, __VA_ARGS__)
#define AMFLOW_LOG_WARN(...) ::amflow::log::write(::amflow::log::Level::kWarn, __VA_ARGS__)
#define AMFLOW_LOG_INFO(...) ::amflow::log::write(::amflow::log::Level::kInfo, __VA_ARGS__)
#define AMFLOW_LOG_DEBUG(...) ::amflow::log::write(::amflow::log::Level::kDebug, __VA_ARGS__)
