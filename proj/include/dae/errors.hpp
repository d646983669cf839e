#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dae {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parse failure carrying a 1-based source position (0 when unknown).
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : Error(line ? what + " at " + std::to_string(line) + ":" + std::to_string(column) : what),
          line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

class SyntaxError : public ParseError {
public:
    using ParseError::ParseError;
};

/// A construct outside the supported PDDL subset; the message names it.
class UnsupportedFeature : public ParseError {
public:
    UnsupportedFeature(const std::string& construct, std::size_t line, std::size_t column)
        : ParseError("unsupported feature: " + construct, line, column), construct_(construct) {}

    const std::string& construct() const noexcept { return construct_; }

private:
    std::string construct_;
};

class UnknownSymbol : public ParseError {
public:
    UnknownSymbol(const std::string& symbol, std::size_t line, std::size_t column)
        : ParseError("unknown symbol: " + symbol, line, column), symbol_(symbol) {}

    const std::string& symbol() const noexcept { return symbol_; }

private:
    std::string symbol_;
};

class TypeMismatch : public ParseError {
public:
    using ParseError::ParseError;
};

class MissingStationPredicates : public ParseError {
public:
    MissingStationPredicates() : ParseError("invariants declare no station predicate", 0, 0) {}
};

class GroundingExplosion : public Error {
public:
    using Error::Error;
};

class NotApplicable : public Error {
public:
    using Error::Error;
};

class NotSequentiallyExecutable : public Error {
public:
    using Error::Error;
};

class GoalUnsupportable : public Error {
public:
    using Error::Error;
};

class InvalidSchedule : public Error {
public:
    using Error::Error;
};

class InitInfeasible : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class CapExceeded : public Error {
public:
    using Error::Error;
};

}  // namespace dae
