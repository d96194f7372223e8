#pragma once

#include <stdexcept>
#include <string>

namespace pcmsel {

// Base of every error the library raises. Each subclass maps onto one CLI
// exit code (see cli.hpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad command-line usage or an unknown identifier supplied by the caller.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data: parse failures, invariant violations,
// I/O failures.
class DataError : public Error {
 public:
  using Error::Error;
};

// A numerical routine could not produce a defined result.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace pcmsel
