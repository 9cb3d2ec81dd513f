#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ridgelayer {

// Base class for every error the library raises.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Caller broke a shape or argument contract.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// Configuration value outside its documented range.
class InvalidConfig : public Error {
 public:
  using Error::Error;
};

// Ridge problem with zero samples or zero feature dimensions.
class EmptyProblem : public Error {
 public:
  using Error::Error;
};

// Factorization hit a non-positive pivot.
class SingularSystem : public Error {
 public:
  using Error::Error;
};

// Malformed tensor file; byte_offset() points at the failing byte.
class FormatError : public Error {
 public:
  FormatError(const std::string& msg, std::size_t byte_offset)
      : Error(msg + " (byte offset " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}
  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

// Filesystem-level failure (missing file, short write, ...).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ridgelayer
