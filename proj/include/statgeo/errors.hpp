#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace statgeo {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text. `offset` is the byte offset of the problem.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// A function, or one of its requested derivatives, is undefined at the
/// evaluation point (log of a non-positive number, division by zero, ...).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(what) {}
  DomainError(const std::string& what, std::vector<double> point);
  const std::vector<double>& point() const { return point_; }

 private:
  std::vector<double> point_;
};

/// A structured document does not match the expected schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Metric or connection arrays are not symmetric where they must be.
class SymmetryError : public Error {
 public:
  using Error::Error;
};

/// The metric is not positive definite at a probe point.
class SpdError : public Error {
 public:
  SpdError(const std::string& what, std::vector<double> point, double min_eigenvalue)
      : Error(what), point_(std::move(point)), min_eigenvalue_(min_eigenvalue) {}
  const std::vector<double>& point() const { return point_; }
  double min_eigenvalue() const { return min_eigenvalue_; }

 private:
  std::vector<double> point_;
  double min_eigenvalue_;
};

/// The pair (g, nabla) fails the Codazzi condition.
class CodazziError : public Error {
 public:
  CodazziError(const std::string& what, std::vector<double> point, double residual)
      : Error(what), point_(std::move(point)), residual_(residual) {}
  const std::vector<double>& point() const { return point_; }
  double residual() const { return residual_; }

 private:
  std::vector<double> point_;
  double residual_;
};

/// An expression used on a torus is not periodic.
class PeriodicityError : public Error {
 public:
  using Error::Error;
};

/// The operation needs a property the structure does not have.
class UnsupportedStructure : public Error {
 public:
  using Error::Error;
};

std::string format_point(const std::vector<double>& p);

}  // namespace statgeo
