#pragma once

#include <stdexcept>
#include <string>

namespace screening {

// Base for every error raised by the library. The CLI maps subclasses onto
// exit codes (usage = 1, data = 2).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration, arguments, or out-of-contract parameters.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data (schema, cohort, attribute files).
class DataError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

// A single record failed validation or imputation; ingestion skips it.
class RecordRejected : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace screening
