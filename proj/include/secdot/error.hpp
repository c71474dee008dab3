#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace secdot {

// Each category maps to a distinct CLI exit code.
enum class ErrorKind {
  kConfig = 2,
  kDomain = 3,
  kDimension = 4,
  kProtocol = 5,
  kProtocolIncomplete = 6,
  kFraming = 7,
  kProtocolVersion = 8,
  kTransport = 9,
  kIo = 10,
  kOverflow = 11,
  kData = 12,
  kAudit = 13,
  kVerification = 14,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace secdot
