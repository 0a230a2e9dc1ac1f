#pragma once

#include <stdexcept>
#include <string>

namespace seqvid {

// Error taxonomy shared by the whole toolkit. Everything derives from
// Error so callers can catch the lot with one handler.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shape/extent disagreement between tensors.
struct DimensionError : Error {
  using Error::Error;
};

// Invalid configuration or construction argument.
struct ParameterError : Error {
  using Error::Error;
};

// Malformed or truncated file contents.
struct FormatError : Error {
  using Error::Error;
};

// Invalid data values (targets out of range, bad labels).
struct DataError : Error {
  using Error::Error;
};

// API called in an unsupported way (missing teacher, generate-mode backward).
struct UsageError : Error {
  using Error::Error;
};

// Non-finite values encountered during training.
struct TrainingError : Error {
  using Error::Error;
};

// NaN/Inf produced by a numeric kernel.
struct NumericError : Error {
  using Error::Error;
};

}  // namespace seqvid
