#pragma once

#include <stdexcept>
#include <string>

namespace rg {

// Error categories map one-to-one onto CLI exit codes.
enum class ErrorKind {
  kInvalidArgument,
  kDimensionMismatch,
  kNumeric,
  kIo,
  kConfig,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

const char* error_kind_name(ErrorKind kind);
int exit_code_for(ErrorKind kind);

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace rg
