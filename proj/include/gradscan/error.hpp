#pragma once

#include <stdexcept>
#include <string>

namespace gradscan {

enum class ErrorKind {
  io,          // file system or encoding failure
  validation,  // input violates a documented invariant or precondition
};

// All library failures are reported through this exception; `kind` lets
// front-ends map failures onto stable exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void throw_io(const std::string& what);
[[noreturn]] void throw_invalid(const std::string& what);

}  // namespace gradscan
