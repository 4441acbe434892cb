#include "gebc/errors.hpp"

namespace gebc {

void throw_error(ErrorKind kind, const std::string& what) {
  switch (kind) {
    case ErrorKind::usage: throw UsageError(what);
    case ErrorKind::format: throw FormatError(what);
    case ErrorKind::integrity: throw IntegrityError(what);
    case ErrorKind::data: throw DataError(what);
    case ErrorKind::protocol: throw ProtocolError(what);
  }
  throw Error(kind, what);
}

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::usage: return "usage error";
    case ErrorKind::format: return "format error";
    case ErrorKind::integrity: return "integrity error";
    case ErrorKind::data: return "data error";
    case ErrorKind::protocol: return "protocol error";
  }
  return "error";
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::usage: return 1;
    case ErrorKind::format: return 2;
    case ErrorKind::integrity:
    case ErrorKind::data: return 3;
    case ErrorKind::protocol: return 4;
  }
  return 1;
}

}  // namespace gebc
