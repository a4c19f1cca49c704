#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace illum {

enum class ErrorKind {
  precondition,
  parameter,
  dimension,
  geometry,
  compatibility,
  configuration,
  io,
  protocol,
  conflict,
  not_found,
  unfittable,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; `kind()` lets callers (CLI, HTTP
// layer) map failures onto exit codes and status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace illum
