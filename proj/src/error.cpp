#include "rg/error.hpp"

namespace rg {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid_argument";
    case ErrorKind::kDimensionMismatch: return "dimension_mismatch";
    case ErrorKind::kNumeric: return "numeric";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kConfig: return "config";
  }
  return "unknown";
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return 2;
    case ErrorKind::kConfig: return 3;
    case ErrorKind::kIo: return 4;
    case ErrorKind::kDimensionMismatch: return 5;
    case ErrorKind::kNumeric: return 6;
  }
  return 1;
}

}  // namespace rg
