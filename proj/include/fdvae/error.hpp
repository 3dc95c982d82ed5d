#pragma once

#include <stdexcept>
#include <string>

namespace fdvae {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A conditioning event of probability zero, an empty treatment arm, a
// zero-variance vector: the quantity asked for is undefined on this input.
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class ResourceLimit : public Error {
 public:
  using Error::Error;
};

class UnsupportedInput : public Error {
 public:
  using Error::Error;
};

// Malformed external data (CSV cells, JSON documents, missing columns).
class DataError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss term or gradient during optimisation.
class TrainingDivergence : public Error {
 public:
  TrainingDivergence(std::string what, std::string culprit)
      : Error(std::move(what)), culprit_(std::move(culprit)) {}

  // Name of the loss term or parameter block that went non-finite.
  const std::string& culprit() const noexcept { return culprit_; }

 private:
  std::string culprit_;
};

}  // namespace fdvae
