#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stablearena {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Non-finite objective or ratings escaping the finite-MLE region.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t epoch)
      : Error(what), epoch_(epoch) {}
  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

class DegenerateNormalization : public Error {
 public:
  using Error::Error;
};

class SingularHessian : public Error {
 public:
  using Error::Error;
};

class UndefinedAuc : public Error {
 public:
  using Error::Error;
};

class RoundSkipped : public Error {
 public:
  using Error::Error;
};

// `location` is a byte offset for documents and a 1-based line for JSONL.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t location)
      : Error(what), location_(location) {}
  std::size_t location() const noexcept { return location_; }

 private:
  std::size_t location_;
};

}  // namespace stablearena
