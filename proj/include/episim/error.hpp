#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace episim {

// Single error type for the whole simulator; `kind` lets callers and tests
// dispatch without string matching.
class Error : public std::runtime_error {
 public:
  enum class Kind {
    file_not_found,
    parse,
    validation,
    schema_parse,
    header_mismatch,
    row_parse,
    duplicate_pid,
    unknown_pid,
    negative_duration,
    unknown_model,
    bad_parameter,
    too_many_exposed,
    io,
  };

  Error(Kind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace episim
