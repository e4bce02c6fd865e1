#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace specexact {

// Base of every error raised by the library. Each subclass carries the
// datum that identifies the failure (an index, a pivot, a location).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::size_t stuck_index)
      : Error(what), stuck_index_(stuck_index) {}
  std::size_t stuck_index() const noexcept { return stuck_index_; }

 private:
  std::size_t stuck_index_;
};

class SingularityError : public Error {
 public:
  SingularityError(const std::string& what, double pivot)
      : Error(what), pivot_(pivot) {}
  double pivot() const noexcept { return pivot_; }

 private:
  double pivot_;
};

// Entry rule produced a non-finite value at 1-based (i, j).
class DataError : public Error {
 public:
  DataError(const std::string& what, std::size_t i, std::size_t j)
      : Error(what), i_(i), j_(j) {}
  std::size_t row() const noexcept { return i_; }
  std::size_t col() const noexcept { return j_; }

 private:
  std::size_t i_, j_;
};

// A spectral parameter hit a pole: a diagonal entry, a block or a section
// eigenvalue. `index` names the offending position or ladder size.
class PoleError : public Error {
 public:
  PoleError(const std::string& what, std::size_t index)
      : Error(what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class CoefficientError : public Error {
 public:
  CoefficientError(const std::string& what, double x) : Error(what), x_(x) {}
  double location() const noexcept { return x_; }

 private:
  double x_;
};

class AssumptionError : public Error {
 public:
  explicit AssumptionError(const std::string& what, double x = 0.0)
      : Error(what), x_(x) {}
  double worst_location() const noexcept { return x_; }

 private:
  double x_;
};

class ContourError : public Error {
 public:
  using Error::Error;
};

class ResolutionError : public Error {
 public:
  ResolutionError(const std::string& what, std::size_t suggested_points)
      : Error(what), suggested_(suggested_points) {}
  std::size_t suggested_points() const noexcept { return suggested_; }

 private:
  std::size_t suggested_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::string path, std::size_t line)
      : Error(what + " (at " + path + ", line " + std::to_string(line) + ")"),
        path_(std::move(path)),
        line_(line) {}
  const std::string& path() const noexcept { return path_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string path_;
  std::size_t line_;
};

}  // namespace specexact
