#pragma once

namespace hydroflow::logx {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

// Threshold comes from HYDROFLOW_LOG={error,warn,info,debug}, parsed once;
// unset or unrecognized values fall back to warn. Output goes to stderr.
Level threshold();
bool enabled(Level lv);

void error(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
void warn(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
void info(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
void debug(const char* fmt, ...) __attribute__((format(printf, 1, 2)));

}  // namespace hydroflow::logx
