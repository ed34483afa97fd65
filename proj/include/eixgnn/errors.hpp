// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace eixgnn {

//! Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

//! Input file does not follow the expected JSON schema. The message starts
//! with the offending field path, e.g. "features[2][0]: expected number".
class FormatError : public Error {
public:
  FormatError(const std::string &path, const std::string &what)
      : Error(path + ": " + what), path_(path) {}
  const std::string &path() const noexcept { return path_; }

private:
  std::string path_;
};

//! Input parses but breaks a structural invariant.
class ValidationError : public Error {
public:
  using Error::Error;
};

class InvalidNodeSet : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class EmptyNodeSet : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class NotAnEdge : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class DimensionMismatch : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class ConceptSizeZero : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class TooFewConcepts : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class NotStochastic : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class TooLargeForExact : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class ShapeMismatch : public ValidationError {
public:
  using ValidationError::ValidationError;
};

//! A pipeline stage failed; wraps the original message with the stage name.
class StageError : public Error {
public:
  StageError(std::string stage, const std::string &what)
      : Error("[" + stage + "] " + what), stage_(std::move(stage)) {}
  const std::string &stage() const noexcept { return stage_; }

private:
  std::string stage_;
};

} // namespace eixgnn
