#pragma once

#include <stdexcept>
#include <string>

namespace adeb {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Bad magic, unknown dtype, malformed text documents.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Payload shorter than the header declares.
class LengthError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Corrupted compressed stream or checksum mismatch.
class DecodeError : public Error {
 public:
  using Error::Error;
};

class CalibrationError : public Error {
 public:
  using Error::Error;
};

// A quality budget that no admissible error-bound vector can meet.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// A guarantee the library relies on was observed broken.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace adeb
