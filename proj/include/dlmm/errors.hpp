#pragma once

#include <stdexcept>
#include <string>

namespace dlmm {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: bad parameters, inconsistent configuration.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Rate index that is not alive (or not simulated) at the requested time.
class IndexError : public Error {
 public:
  using Error::Error;
};

// Combinatorial blow-up: subset expansions, tree enumeration.
class SizeError : public Error {
 public:
  using Error::Error;
};

// Operation invoked out of order, e.g. a step without its drifts.
class SequencingError : public Error {
 public:
  using Error::Error;
};

// Ensemble does not reach the time an operation needs.
class HorizonError : public Error {
 public:
  using Error::Error;
};

// Root finding failed because the target lies outside the bracket.
class NoSolutionError : public Error {
 public:
  using Error::Error;
};

// Input or output file that cannot be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dlmm
