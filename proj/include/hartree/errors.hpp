#pragma once

#include <map>
#include <stdexcept>
#include <string>

namespace hartree {

// Every failure raised by the library derives from Error so callers (the CLI in
// particular) can map them onto exit codes in one place.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class PreconditionError : public Error {
public:
  using Error::Error;
};

class DimensionError : public Error {
public:
  using Error::Error;
};

class UndefinedFunctionalError : public Error {
public:
  using Error::Error;
};

class OracleFailure : public Error {
public:
  using Error::Error;
};

class LinearAlgebraError : public Error {
public:
  using Error::Error;
};

class StepSizeError : public Error {
public:
  using Error::Error;
};

// Carries the defect report of the last iterate.
class IterationLimitError : public Error {
public:
  IterationLimitError(const std::string &what, std::map<std::string, double> report)
      : Error(what), report_(std::move(report)) {}
  const std::map<std::string, double> &report() const { return report_; }

private:
  std::map<std::string, double> report_;
};

class BracketError : public Error {
public:
  using Error::Error;
};

class TrivialLimitError : public Error {
public:
  using Error::Error;
};

class InsufficientDataError : public Error {
public:
  using Error::Error;
};

class WrongRegimeError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

} // namespace hartree
