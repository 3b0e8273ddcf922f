#pragma once

#include <stdexcept>
#include <string>

namespace hydroflow {

// Error taxonomy shared by the library and the CLI exit-code mapping:
// param -> usage error (exit 2), format/unsupported/data -> data error (exit 3),
// io -> I/O error (exit 4).
enum class ErrorKind { param, format, unsupported, data, io };

struct Error : std::runtime_error {
  ErrorKind kind;
  Error(ErrorKind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

[[noreturn]] inline void fail(ErrorKind k, const std::string& msg) {
  throw Error(k, msg);
}

}  // namespace hydroflow
