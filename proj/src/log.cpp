#include "hydroflow/log.hpp"

#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace hydroflow::logx {

static Level parse_env() {
  const char* v = std::getenv("HYDROFLOW_LOG");
  if (!v) return Level::warn;
  if (!std::strcmp(v, "error")) return Level::error;
  if (!std::strcmp(v, "warn")) return Level::warn;
  if (!std::strcmp(v, "info")) return Level::info;
  if (!std::strcmp(v, "debug")) return Level::debug;
  std::fprintf(stderr, "[warn] unrecognized HYDROFLOW_LOG=%s, using warn\n", v);
  return Level::warn;
}

Level threshold() {
  static Level lv = parse_env();
  return lv;
}

bool enabled(Level lv) { return int(lv) <= int(threshold()); }

static void emit(Level lv, const char* fmt, va_list args) {
  static const char* names[] = {"error", "warn", "info", "debug"};
  std::fprintf(stderr, "[%s] ", names[int(lv)]);
  std::vfprintf(stderr, fmt, args);
  std::fputc('\n', stderr);
}

#define HYDROFLOW_DEFINE_LOG_FN(name, level)       \
  void name(const char* fmt, ...) {                \
    if (!enabled(level)) return;                   \
    va_list args;                                  \
    va_start(args, fmt);                           \
    emit(level, fmt, args);                        \
    va_end(args);                                  \
  }

HYDROFLOW_DEFINE_LOG_FN(error, Level::error)
HYDROFLOW_DEFINE_LOG_FN(warn, Level::warn)
HYDROFLOW_DEFINE_LOG_FN(info, Level::info)
HYDROFLOW_DEFINE_LOG_FN(debug, Level::debug)

#undef HYDROFLOW_DEFINE_LOG_FN

}  // namespace hydroflow::logx
