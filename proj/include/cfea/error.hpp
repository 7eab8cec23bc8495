#pragma once

#include <stdexcept>
#include <string>

namespace cfea {

// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid configuration values (bad sizes, non-positive rates, ...).
struct ConfigError : Error {
  using Error::Error;
};

// Malformed runtime inputs (shape mismatches, bad label values, ...).
struct InputError : Error {
  using Error::Error;
};

// Non-finite values where finite ones are required.
struct NumericError : Error {
  using Error::Error;
};

// Filesystem / serialization failures.
struct IoError : Error {
  using Error::Error;
};

// Structural mismatch between parameter sets (names or shapes differ).
struct StructuralError : Error {
  using Error::Error;
};

// Checkpoint file does not exist.
struct CheckpointNotFoundError : IoError {
  using IoError::IoError;
};

// Checkpoint bytes fail the checksum or are otherwise unreadable.
struct CheckpointCorruptError : IoError {
  using IoError::IoError;
};

// Checkpoint was written by an incompatible format version.
struct CheckpointVersionError : IoError {
  using IoError::IoError;
};

}  // namespace cfea
