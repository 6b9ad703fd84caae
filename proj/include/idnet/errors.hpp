#pragma once

#include <stdexcept>
#include <string>

namespace idnet {

// Base of every error thrown by the library. The CLI maps subclasses onto
// exit codes (see tools/idnet_main.cpp).
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error
{
public:
  using Error::Error;
};

class ArgumentError : public Error
{
public:
  using Error::Error;
};

class NumericalError : public Error
{
public:
  using Error::Error;
};

class DivergenceError : public NumericalError
{
public:
  DivergenceError(long iteration, std::string const &what)
    : NumericalError("diverged at iteration " + std::to_string(iteration) + ": " + what)
    , iteration_{iteration}
  {
  }

  long iteration() const { return iteration_; }

private:
  long iteration_;
};

class IoError : public Error
{
public:
  using Error::Error;
};

// Malformed document. `path` names the offending field (JSON-pointer style).
class ParseError : public IoError
{
public:
  ParseError(std::string path, std::string const &what)
    : IoError(path.empty() ? what : path + ": " + what)
    , path_{std::move(path)}
  {
  }

  std::string const &path() const { return path_; }

private:
  std::string path_;
};

// Well-formed document whose contents violate a shape invariant.
class ValidationError : public Error
{
public:
  ValidationError(std::string field, std::string const &what)
    : Error(field + ": " + what)
    , field_{std::move(field)}
  {
  }

  std::string const &field() const { return field_; }

private:
  std::string field_;
};

} // namespace idnet
