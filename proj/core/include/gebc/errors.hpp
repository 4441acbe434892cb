#pragma once

#include <stdexcept>
#include <string>

namespace gebc {

// Error taxonomy shared by every module. The CLI maps each kind onto a
// stable process exit code (see exit_code()).
enum class ErrorKind {
  usage,      // bad arguments or API misuse
  format,     // malformed header, bad magic, unsupported version, I/O failure
  integrity,  // truncated or inconsistent payload, corrupt stream
  data,       // non-finite values
  protocol,   // client/server state desynchronization
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define GEBC_DEFINE_ERROR(Name, Kind)                                   \
  class Name : public Error {                                           \
   public:                                                              \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
  };

GEBC_DEFINE_ERROR(UsageError, usage)
GEBC_DEFINE_ERROR(FormatError, format)
GEBC_DEFINE_ERROR(IntegrityError, integrity)
GEBC_DEFINE_ERROR(DataError, data)
GEBC_DEFINE_ERROR(ProtocolError, protocol)

#undef GEBC_DEFINE_ERROR

// Raised when a framed object carries a version this build cannot read.
class UnsupportedVersionError : public FormatError {
 public:
  UnsupportedVersionError(const std::string& what, unsigned version)
      : FormatError(what), version_(version) {}
  unsigned version() const noexcept { return version_; }

 private:
  unsigned version_;
};

[[noreturn]] void throw_error(ErrorKind kind, const std::string& what);

const char* to_string(ErrorKind kind) noexcept;

// 1=usage, 2=format, 3=integrity/data, 4=protocol.
int exit_code(ErrorKind kind) noexcept;

}  // namespace gebc
