#ifndef FERES_ERRORS_HPP
#define FERES_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace feres {

/// Category of a contract violation. Surfaced by the CLI as a machine-readable tag.
enum class ErrorKind {
  singular_input,
  range,
  admissibility,
  truncation,
  precondition,
  numerical,
  grid,
  parse,
  validation,
  invariant,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::singular_input: return "singular_input";
    case ErrorKind::range: return "range";
    case ErrorKind::admissibility: return "admissibility";
    case ErrorKind::truncation: return "truncation";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::grid: return "grid";
    case ErrorKind::parse: return "parse";
    case ErrorKind::validation: return "validation";
    case ErrorKind::invariant: return "invariant";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when a prescribed branch word stops having positive probability.
class InadmissibleWord : public Error {
 public:
  InadmissibleWord(std::size_t index, const std::string& message)
      : Error(ErrorKind::admissibility, message), index_(index) {}

  /// Position in the word of the first branch with zero probability.
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace feres

#endif  // FERES_ERRORS_HPP
