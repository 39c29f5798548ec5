#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace popsym {

// Base for every domain error raised by the library. The CLI maps these to
// exit code 1; anything else escaping is a bug.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& what) : Error("invalid_input", what) {}
};

// A step asks for more nodes of some state than the configuration holds.
class DemandError : public Error {
 public:
  DemandError(std::string state, const std::string& what)
      : Error("demand", what), state_(std::move(state)) {}
  const std::string& state() const noexcept { return state_; }

 private:
  std::string state_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("syntax", "line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class SemanticError : public Error {
 public:
  SemanticError(std::string symbol, const std::string& what)
      : Error("semantic", what), symbol_(std::move(symbol)) {}
  const std::string& symbol() const noexcept { return symbol_; }

 private:
  std::string symbol_;
};

class UnsupportedCase : public Error {
 public:
  explicit UnsupportedCase(const std::string& what) : Error("unsupported_case", what) {}
};

class AnalysisLimit : public Error {
 public:
  explicit AnalysisLimit(const std::string& what) : Error("analysis_limit", what) {}
};

// The protocol fails to compute on the given input (no correct stable
// configuration is reachable).
class ProtocolFailure : public Error {
 public:
  explicit ProtocolFailure(const std::string& what) : Error("protocol_error", what) {}
};

class HypothesisViolated : public Error {
 public:
  explicit HypothesisViolated(const std::string& what) : Error("hypothesis", what) {}
};

}  // namespace popsym
