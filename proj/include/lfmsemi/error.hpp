#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lfmsemi {

enum class ErrorKind {
  Dimension,
  Numeric,
  Domain,
  Branch,
  Pole,
  NotInvertible,
  Form,
  WrongForm,
  DegenerateInput,
  InconsistentInput,
  Parse,
  Internal,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::Numeric: return "numeric";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Branch: return "branch";
    case ErrorKind::Pole: return "pole";
    case ErrorKind::NotInvertible: return "not-invertible";
    case ErrorKind::Form: return "form";
    case ErrorKind::WrongForm: return "wrong-form";
    case ErrorKind::DegenerateInput: return "degenerate-input";
    case ErrorKind::InconsistentInput: return "inconsistent-input";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Internal: return "internal";
  }
  return "unknown";
}

/// Every failure raised by the library carries one of the kinds above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace lfmsemi
