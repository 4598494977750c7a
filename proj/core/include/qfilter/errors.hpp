#pragma once

#include <stdexcept>
#include <string>

namespace qfilter {

/// Input failed a mathematical admissibility check (non-Hermitian matrix,
/// indefinite correlation matrix, rank-deficient measurement, ...).
/// Carries the name of the pipeline stage that rejected the input.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string stage, const std::string& what)
      : std::runtime_error("[" + stage + "] " + what), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Malformed model document or operator expression. `line`/`column` are
/// 1-based; column 0 means "whole document / not locatable".
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line = 0, int column = 0)
      : std::runtime_error(format(what, line, column)), line_(line), column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, int line, int column) {
    if (line <= 0) return what;
    return std::to_string(line) + ":" + std::to_string(column) + ": " + what;
  }
  int line_;
  int column_;
};

/// A stochastic integration step produced an unrepairable state
/// (non-finite increment, normalization breakdown). Carries the step index.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, long step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

  long step() const noexcept { return step_; }

 private:
  long step_;
};

}  // namespace qfilter
