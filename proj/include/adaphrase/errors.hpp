#pragma once

#include <stdexcept>
#include <string>

namespace adaphrase {

// Base for every failure the library reports. Callers that only care about
// "something went wrong" catch this; the CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Invalid parameter values or inconsistent run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed text input (tuple files, rating files, dumps).
class FormatError : public Error {
 public:
  using Error::Error;
};

// A token or id that does not resolve in the lexicon.
class LookupError : public Error {
 public:
  using Error::Error;
};

class SamplingError : public Error {
 public:
  using Error::Error;
};

// Statistic undefined for the given input (constant column, empty set, ...).
class EvalError : public Error {
 public:
  using Error::Error;
};

// A parameter became NaN or Inf during training.
class NumericError : public Error {
 public:
  using Error::Error;
};

class ModelFileError : public Error {
 public:
  enum class Kind { Version, Truncated, Checksum, Corrupt };

  ModelFileError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace adaphrase
