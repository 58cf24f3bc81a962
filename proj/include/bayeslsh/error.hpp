// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BayesLSH Authors

#pragma once

#include <stdexcept>
#include <string>

namespace bayeslsh {

// Error categories double as process exit codes for the command-line tool.
enum class ErrorKind : int {
  kUsage = 2,
  kIo = 3,
  kNumeric = 4,
  kGuard = 5,
  kParse = 6,
  kContract = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

struct UsageError : Error {
  explicit UsageError(const std::string& what) : Error(ErrorKind::kUsage, what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

// Continued fraction failed to converge, or a probability left [0, 1].
struct NumericError : Error {
  explicit NumericError(const std::string& what) : Error(ErrorKind::kNumeric, what) {}
};

// A configured resource bound (hash cap, pair budget) would be exceeded.
struct GuardError : Error {
  explicit GuardError(const std::string& what) : Error(ErrorKind::kGuard, what) {}
};

struct ParseError : Error {
  ParseError(const std::string& what, std::size_t line)
      : Error(ErrorKind::kParse, "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Caller broke a documented precondition.
struct ContractViolation : Error {
  explicit ContractViolation(const std::string& what)
      : Error(ErrorKind::kContract, what) {}
};

}  // namespace bayeslsh
