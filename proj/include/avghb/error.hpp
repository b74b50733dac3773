#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace avghb {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Vector or matrix sizes disagree with the problem dimension.
class DimensionError : public Error {
 public:
  DimensionError(std::size_t expected, std::size_t got)
      : Error("dimension mismatch: expected " + std::to_string(expected) + ", got " +
              std::to_string(got)),
        expected_(expected),
        got_(got) {}

  std::size_t expected() const noexcept { return expected_; }
  std::size_t got() const noexcept { return got_; }

 private:
  std::size_t expected_;
  std::size_t got_;
};

// An argument is outside the domain where an operation is defined
// (non-finite input, violated ordering, parameters outside their range).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Iterates left the finite region or exceeded the divergence threshold.
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t k, double norm)
      : Error("iterates diverged at k=" + std::to_string(k) + " (|x_k| = " +
              std::to_string(norm) + ")"),
        k_(k),
        norm_(norm) {}

  std::size_t iteration() const noexcept { return k_; }
  double norm() const noexcept { return norm_; }

 private:
  std::size_t k_;
  double norm_;
};

// Malformed input text. `line` is 1-based; 0 means "not tied to a line".
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace avghb
