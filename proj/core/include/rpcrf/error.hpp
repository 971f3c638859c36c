#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rpcrf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed pattern text. `position()` is the 0-based offset into the source.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, const std::string& message)
      : Error("syntax error at position " + std::to_string(position) + ": " +
              message),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// A symbol that is not part of the declared label alphabet.
class AlphabetError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent data (datasets, model files, length mismatches).
class DataError : public Error {
 public:
  using Error::Error;
};

/// The product automaton exceeded its configured state cap.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// The training objective became non-finite.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace rpcrf
