#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace csid {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An index component is outside its mode's alphabet.
class BoundsError : public Error {
 public:
  BoundsError(std::size_t mode, std::size_t index, std::size_t extent)
      : Error("index " + std::to_string(index) + " out of range for mode " +
              std::to_string(mode) + " (extent " + std::to_string(extent) +
              ")"),
        mode_(mode) {}

  std::size_t mode() const noexcept { return mode_; }

 private:
  std::size_t mode_;
};

/// Shapes or lengths of two operands do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values, or a linear system that cannot be solved.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data (CSV, schema, artifact).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration, such as a missing marginal for a missing mode.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The sample has fewer distinct values than requested quantizer levels.
class DegenerateCodebookError : public Error {
 public:
  DegenerateCodebookError(std::size_t distinct, std::size_t requested)
      : Error("only " + std::to_string(distinct) +
              " distinct values for a codebook of " +
              std::to_string(requested) + " levels"),
        distinct_(distinct) {}

  std::size_t distinct_values() const noexcept { return distinct_; }

 private:
  std::size_t distinct_;
};

}  // namespace csid
