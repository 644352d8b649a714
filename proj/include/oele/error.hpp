#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace oele {

// Base for every error raised by the toolkit. Each subclass corresponds to a
// named failure of one operation so callers can catch narrowly.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownConcept : public Error {
 public:
  explicit UnknownConcept(const std::string& id)
      : Error("unknown concept '" + id + "'"), id_(id) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

class UnknownLink : public Error {
 public:
  UnknownLink(const std::string& source, const std::string& target)
      : Error("unknown link '" + source + "' -> '" + target + "'") {}
};

class InvalidMap : public Error {
 public:
  using Error::Error;
};

class EmptyQuiz : public Error {
 public:
  EmptyQuiz() : Error("quiz has no determinate questions") {}
};

class PathLimitExceeded : public Error {
 public:
  explicit PathLimitExceeded(std::size_t cap)
      : Error("simple-path enumeration exceeded cap of " +
              std::to_string(cap) + " paths") {}
};

// Syntax or schema violation in a text input. line is 1-based (0 = unknown).
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ReplayError : public Error {
 public:
  ReplayError(std::size_t index, const std::string& what)
      : Error("event " + std::to_string(index) + ": " + what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

class OutOfOrderEvent : public Error {
 public:
  OutOfOrderEvent(std::size_t index, double timestamp, double previous)
      : Error("event " + std::to_string(index) + " at t=" +
              std::to_string(timestamp) + " precedes t=" +
              std::to_string(previous)),
        index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

class EmptySession : public Error {
 public:
  EmptySession() : Error("session has zero total duration") {}
};

class MalformedTree : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

class DegenerateDenominator : public Error {
 public:
  DegenerateDenominator() : Error("pre score must be below max score") {}
};

class InsufficientEdits : public Error {
 public:
  InsufficientEdits() : Error("slope needs at least two map edits") {}
};

class NoObservationsInSpan : public Error {
 public:
  NoObservationsInSpan() : Error("no affect observations in span") {}
};

class DegenerateVariance : public Error {
 public:
  using Error::Error;
};

class DegenerateCovariate : public Error {
 public:
  using Error::Error;
};

class EmptyPattern : public Error {
 public:
  EmptyPattern() : Error("pattern is empty") {}
};

}  // namespace oele
