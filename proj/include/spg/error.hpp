#pragma once

#include <stdexcept>
#include <string>

namespace spg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed penalty structure: bad indices, empty groups, self-loops, duplicate edges.
class StructuralError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid scalar argument (negative threshold, non-positive accuracy, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Raised by the iterative solvers when an iterate or objective stops being finite.
class SolverError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require_dims(bool ok, const std::string& what) {
  if (!ok) throw DimensionError("dimension mismatch: " + what);
}

}  // namespace detail
}  // namespace spg
