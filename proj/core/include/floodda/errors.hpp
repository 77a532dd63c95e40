#pragma once

#include <stdexcept>
#include <string>

namespace floodda {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad or inconsistent configuration (missing keys, invalid combinations).
class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// Malformed input file. Messages carry file path and, where known, line number.
class FormatError : public Error {
public:
  explicit FormatError(const std::string& msg) : Error(msg) {}
};

/// Argument outside the valid domain of an operation.
class DomainError : public Error {
public:
  explicit DomainError(const std::string& msg) : Error(msg) {}
};

/// Numerical failure during time integration (NaN/Inf state, no stable dt).
class SolverError : public Error {
public:
  explicit SolverError(const std::string& msg) : Error(msg) {}
};

/// Numerical failure during analysis (singular system, degenerate ensemble).
class NumericalError : public Error {
public:
  explicit NumericalError(const std::string& msg) : Error(msg) {}
};

} // namespace floodda
