#pragma once

#include <stdexcept>
#include <string>

namespace impulsecert {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Caller broke a documented precondition (asymmetric input, t0 > t1, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

class DefinitenessError : public Error {
 public:
  DefinitenessError(const std::string& what, double eigenvalue)
      : Error(what), eigenvalue_(eigenvalue) {}
  double eigenvalue() const { return eigenvalue_; }

 private:
  double eigenvalue_;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class NoUniqueSolutionError : public NumericError {
 public:
  using NumericError::NumericError;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public InputError {
 public:
  SchemaError(const std::string& path, const std::string& message)
      : InputError(path + ": " + message), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace impulsecert
