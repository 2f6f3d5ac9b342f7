#pragma once

#include <stdexcept>
#include <string>

namespace fast2 {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Dataset file lacks a required column.
class SchemaError : public Error {
  public:
    using Error::Error;
};

/// Duplicate ids, empty documents and similar violations of the corpus invariants.
class IntegrityError : public Error {
  public:
    using Error::Error;
};

class EmptyCorpusError : public Error {
  public:
    using Error::Error;
};

class FeaturizationError : public Error {
  public:
    using Error::Error;
};

/// Training set holds a single class; keep seeding until both classes exist.
class TrainingError : public Error {
  public:
    using Error::Error;
};

/// No unlabeled documents remain.
class ExhaustedError : public Error {
  public:
    using Error::Error;
};

class LookupError : public Error {
  public:
    using Error::Error;
};

class StateError : public Error {
  public:
    using Error::Error;
};

class SimulationError : public Error {
  public:
    using Error::Error;
};

/// A metric or estimator parameter has no defined value for the given input.
class UndefinedError : public Error {
  public:
    using Error::Error;
};

class UsageError : public Error {
  public:
    using Error::Error;
};

}  // namespace fast2
