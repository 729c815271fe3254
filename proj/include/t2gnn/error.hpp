#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace t2gnn {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or call arguments (bad ranges, empty index sets, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Violated API contract, e.g. backward on a non-scalar.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Input file content could not be parsed.
class ParseError : public Error {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : Error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Input files parse but are inconsistent (feature widths, index ranges).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A value became degenerate (zero-norm rows, non-finite numbers).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int epoch)
      : Error(what + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

}  // namespace t2gnn
