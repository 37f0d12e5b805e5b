#ifndef QEGBS_ERRORS_HPP_
#define QEGBS_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qegbs {

// Base class for all toolkit errors. Two intermediate categories exist so the
// CLI can map failures to exit codes: DataError -> 2, DecodeError -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class DecodeError : public Error {
 public:
  using Error::Error;
};

// No segmentation exists for a word and no fallback token is configured.
class UnknownWordError : public DataError {
 public:
  using DataError::DataError;
};

// A token sequence ends on a continuation-marked piece.
class DanglingContinuationError : public DataError {
 public:
  using DataError::DataError;
};

// Tag list length does not match its alignment target.
class LengthMismatchError : public DataError {
 public:
  using DataError::DataError;
};

class MalformedTableError : public DataError {
 public:
  using DataError::DataError;
};

class EmptyCorpusError : public DataError {
 public:
  using DataError::DataError;
};

class EmptyReferenceError : public DataError {
 public:
  using DataError::DataError;
};

// maxLen leaves no room for all constraint tokens plus EOS.
class ConstraintsUnsatisfiableError : public DecodeError {
 public:
  using DecodeError::DecodeError;
};

// Brute-force enumeration would exceed the configured state cap.
class SpaceTooLargeError : public DecodeError {
 public:
  using DecodeError::DecodeError;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& message, std::size_t line)
      : DataError(message + " (line " + std::to_string(line) + ")"),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace qegbs

#endif  // QEGBS_ERRORS_HPP_
