#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace varigeo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t offset)
      : Error(message + " at offset " + std::to_string(offset)), offset_(offset) {}

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class UnknownIdentifierError : public ParseError {
 public:
  UnknownIdentifierError(const std::string& name, std::size_t offset)
      : ParseError("unknown identifier '" + name + "'", offset), name_(name) {}

  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

/// log/sqrt of a negative number, division by zero, overflow.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, const std::string& subexpression)
      : Error(what + " in '" + subexpression + "'"), subexpression_(subexpression) {}

  const std::string& subexpression() const { return subexpression_; }

 private:
  std::string subexpression_;
};

class MissingVariableError : public Error {
 public:
  explicit MissingVariableError(const std::string& name)
      : Error("no value supplied for variable '" + name + "'"), name_(name) {}

  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class SingularMetricError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class GridError : public Error {
 public:
  using Error::Error;
};

class RankDeficiencyError : public Error {
 public:
  using Error::Error;
};

class BlowUpError : public Error {
 public:
  using Error::Error;
};

class ScenarioError : public Error {
 public:
  using Error::Error;
};

}  // namespace varigeo
