#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nsa {

/// Base of every error the library throws.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A subterm (or a whole question) lies outside the decidable fragment.
class UnsupportedTerm : public Error {
public:
  using Error::Error;
};

/// Ill-sorted construction (Mod on a rational operand, mismatched
/// comparison operands, a base sort the representative cannot carry...).
class SortError : public Error {
public:
  explicit SortError(const std::string& what, std::string variable = {})
      : Error(what), variable_(std::move(variable)) {}
  const std::string& variable() const noexcept { return variable_; }

private:
  std::string variable_;
};

class DivisionByZeroAt : public Error {
public:
  explicit DivisionByZeroAt(long long index)
      : Error("division by zero at index " + std::to_string(index)), index_(index) {}
  long long index() const noexcept { return index_; }

private:
  long long index_;
};

/// Reader/parser failure. `position` is a byte offset into the input,
/// `line`/`column` are 1-based.
class SyntaxError : public Error {
public:
  SyntaxError(const std::string& msg, std::size_t position, std::size_t line, std::size_t column)
      : Error(msg + " at " + std::to_string(line) + ":" + std::to_string(column)),
        message_(msg), position_(position), line_(line), column_(column) {}
  const std::string& message() const noexcept { return message_; }
  std::size_t position() const noexcept { return position_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

private:
  std::string message_;
  std::size_t position_, line_, column_;
};

class SignatureMismatch : public Error {
public:
  using Error::Error;
};

class SupportOutOfUniverse : public Error {
public:
  using Error::Error;
};

class IncompatibleUltrafilters : public Error {
public:
  using Error::Error;
};

class ExtensionInfeasible : public Error {
public:
  using Error::Error;
};

class UndecidedPartition : public Error {
public:
  using Error::Error;
};

class WitnessSearchExhausted : public Error {
public:
  WitnessSearchExhausted(std::size_t k, std::size_t bound)
      : Error("no witness for conjunction " + std::to_string(k) + " within bound " +
              std::to_string(bound)),
        k_(k), bound_(bound) {}
  std::size_t k() const noexcept { return k_; }
  std::size_t bound() const noexcept { return bound_; }

private:
  std::size_t k_, bound_;
};

/// Raised when the witness prefix of a saturation chain matches no
/// closed form in the fragment.
class NoClosedForm : public Error {
public:
  using Error::Error;
};

/// Invalid ultrafilter table, malformed model, and similar input defects.
class InvalidInput : public Error {
public:
  using Error::Error;
};

}  // namespace nsa
