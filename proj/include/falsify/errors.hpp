#pragma once

#include <stdexcept>
#include <string>

namespace falsify {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Text could not be parsed; `offset` is a character position into the input.
class SyntaxError : public Error {
public:
  SyntaxError(const std::string& msg, std::size_t offset)
      : Error(msg + " (at offset " + std::to_string(offset) + ")"),
        offset(offset) {}
  std::size_t offset;
};

// Temporal interval with a > b.
class IntervalError : public Error {
public:
  using Error::Error;
};

// A formula or expression references a signal the trace does not carry.
class UnknownSignal : public Error {
public:
  explicit UnknownSignal(const std::string& name)
      : Error("unknown signal: " + name), name(name) {}
  std::string name;
};

// Trace too short for the formula horizon at the evaluation time.
class InsufficientHorizon : public Error {
public:
  InsufficientHorizon(double needed, double available)
      : Error("insufficient horizon: need " + std::to_string(needed) +
              " s, trace provides " + std::to_string(available) + " s"),
        needed(needed), available(available) {}
  double needed;
  double available;
};

// Division by zero or other arithmetic failure during evaluation.
class EvaluationError : public Error {
public:
  using Error::Error;
};

// A signal expression referenced a parameter with no binding.
class UnboundParameter : public Error {
public:
  explicit UnboundParameter(const std::string& name)
      : Error("unbound parameter: " + name), name(name) {}
  std::string name;
};

class NonPositiveDt : public Error {
public:
  NonPositiveDt() : Error("dt must be > 0") {}
};

class MismatchedSignals : public Error {
public:
  using Error::Error;
};

class MismatchedDt : public Error {
public:
  using Error::Error;
};

// CSV trace parsing failure; positions are 1-based.
class ParseError : public Error {
public:
  ParseError(const std::string& msg, std::size_t row, std::size_t column)
      : Error(msg + " (row " + std::to_string(row) + ", column " +
              std::to_string(column) + ")"),
        row(row), column(column) {}
  std::size_t row;
  std::size_t column;
};

class UndeclaredParameter : public Error {
public:
  explicit UndeclaredParameter(const std::string& name)
      : Error("undeclared parameter: " + name), name(name) {}
  std::string name;
};

class MissingInputAssignment : public Error {
public:
  using Error::Error;
};

class OutOfBounds : public Error {
public:
  explicit OutOfBounds(const std::string& param)
      : Error("parameter out of bounds: " + param), param(param) {}
  std::string param;
};

class ScopeError : public Error {
public:
  using Error::Error;
};

class WeightOutOfRange : public Error {
public:
  WeightOutOfRange() : Error("fitness weight must lie in [0,1]") {}
};

// Simulation produced a non-finite state or output.
class NumericalBlowup : public Error {
public:
  explicit NumericalBlowup(double at_time)
      : Error("non-finite state at t = " + std::to_string(at_time)),
        at_time(at_time) {}
  double at_time;
};

class SignalMismatch : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace falsify
