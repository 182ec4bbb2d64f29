#pragma once

#include <stdexcept>
#include <string>

namespace celm {

// Input outside the mathematical domain of an operation (non-finite values,
// malformed probability vectors, out-of-range class ids).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Caller broke a structural precondition, e.g. mismatched dimensions.
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Forward pass requested on a network with no hidden neurons.
class EmptyNetworkError : public std::logic_error {
 public:
  EmptyNetworkError() : std::logic_error("network has no hidden neurons") {}
};

// Base for numerical failures the CLI reports with its own exit code.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularityError : public NumericError {
 public:
  using NumericError::NumericError;
};

// 1 + h'Ph <= 0: the P matrix has lost positive definiteness and must be
// rebuilt from the stored history.
class RlsBreakdown : public NumericError {
 public:
  using NumericError::NumericError;
};

// Malformed command-line input, configuration or grid specification.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t column)
      : std::runtime_error(what + " (row " + std::to_string(row) + ", column " +
                           std::to_string(column) + ")"),
        row_(row),
        column_(column) {}
  explicit ParseError(const std::string& what)
      : std::runtime_error(what), row_(0), column_(0) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

}  // namespace celm
