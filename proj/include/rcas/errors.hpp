#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rcas {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression or configuration text.
class ParseError : public Error {
 public:
  ParseError(std::string message, int line, int column,
             std::vector<std::string> expected = {})
      : Error(format(message, line, column, expected)),
        message_(std::move(message)),
        line_(line),
        column_(column),
        expected_(std::move(expected)) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }
  const std::string& message() const noexcept { return message_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  static std::string format(const std::string& message, int line, int column,
                            const std::vector<std::string>& expected) {
    std::string out = std::to_string(line) + ":" + std::to_string(column) + ": " + message;
    if (!expected.empty()) {
      out += " (expected ";
      for (std::size_t i = 0; i < expected.size(); ++i) {
        if (i > 0) out += i + 1 == expected.size() ? " or " : ", ";
        out += expected[i];
      }
      out += ")";
    }
    return out;
  }

  std::string message_;
  int line_;
  int column_;
  std::vector<std::string> expected_;
};

/// Semantically invalid configuration (unknown keys, bad values, missing sections).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The nonlinearity is not a polynomial in the jet variables.
class NonPolynomialNonlinearity : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// A command needing an exact solution ran on a configuration without one.
class MissingExact : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// A fractional power saw a non-positive base, or a division saw zero.
class DomainEvaluationError : public Error {
 public:
  using Error::Error;
};

/// Too few sample points could be evaluated to decide whether a function vanishes.
class ZeroTestInconclusive : public Error {
 public:
  using Error::Error;
};

/// The separable representation outgrew its configured key budget.
class TermBudgetExceeded : public Error {
 public:
  TermBudgetExceeded(std::size_t terms, std::size_t budget, int step = -1)
      : Error(describe(terms, budget, step)), terms_(terms), budget_(budget), step_(step) {}

  std::size_t terms() const noexcept { return terms_; }
  std::size_t budget() const noexcept { return budget_; }
  int step() const noexcept { return step_; }

  TermBudgetExceeded at_step(int step) const { return {terms_, budget_, step}; }

 private:
  static std::string describe(std::size_t terms, std::size_t budget, int step) {
    std::string out = "term budget exceeded: " + std::to_string(terms) + " keys > " +
                      std::to_string(budget);
    if (step >= 0) out += " at correction " + std::to_string(step);
    return out;
  }

  std::size_t terms_;
  std::size_t budget_;
  int step_;
};

/// A numeric contract (realness, conjugate symmetry) failed beyond tolerance.
class ToleranceViolation : public Error {
 public:
  using Error::Error;
};

/// The contraction constant is not below one, so the truncation bound is void.
class NotContractive : public Error {
 public:
  using Error::Error;
};

/// A total derivative would exceed the declared maximum jet order.
class MaxOrderExceeded : public Error {
 public:
  using Error::Error;
};

/// Exponential-polynomial evaluation would overflow.
class OverflowError : public Error {
 public:
  using Error::Error;
};

}  // namespace rcas
