#pragma once

#include <stdexcept>
#include <string>

namespace pvilab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct PreconditionError : Error { using Error::Error; };
struct IndexError : Error { using Error::Error; };
struct SchemaError : Error { using Error::Error; };
struct SamplingError : Error { using Error::Error; };
struct InstabilityError : Error { using Error::Error; };
struct UnsupportedWeightError : Error { using Error::Error; };

// raised when a surface point lies on one of the eight special points
struct ExceptionalPointError : Error {
  int index;
  int sign;
  ExceptionalPointError(const std::string& msg, int i, int s) : Error(msg), index(i), sign(s) {}
};

struct DegenerateResidueError : Error {
  int index;
  DegenerateResidueError(const std::string& msg, int i) : Error(msg), index(i) {}
};

struct ClearanceError : Error {
  std::string segment;
  ClearanceError(const std::string& msg, std::string seg) : Error(msg), segment(std::move(seg)) {}
};

struct AccuracyError : Error {
  double residual;
  AccuracyError(const std::string& msg, double r) : Error(msg), residual(r) {}
};

}  // namespace pvilab
