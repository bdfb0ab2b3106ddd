#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace odesplit {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text. `offset` is the byte offset of the failing token.
class ParseError : public Error {
public:
  ParseError(std::size_t offset, std::string expected, std::string_view source);

  std::size_t offset() const noexcept { return offset_; }
  const std::string& expected() const noexcept { return expected_; }

private:
  std::size_t offset_;
  std::string expected_;
};

/// Invalid arguments or inconsistent problem data (shape mismatches, bad options).
class InvalidArgument : public Error {
public:
  using Error::Error;
};

enum class NumericalErrorKind {
  EvalDomain,       ///< division by zero, ln(0) and similar poles
  SingularGauge,    ///< gauge determinant below threshold
  RootCollision,    ///< characteristic roots coincide
  RiccatiBlowup,    ///< dynamic gauge exceeded its magnitude cap
  StepUnderflow,
  MaxSteps,
  BlowUp,           ///< integrated state exceeded the magnitude cap
  ZeroQ,
  ZeroCoefficient,
  MaxDepth,         ///< adaptive quadrature could not converge
  LinearSolve,
  GridMismatch,
  EmptyOverlap,
};

std::string_view to_string(NumericalErrorKind kind);

/// A failure tied to a point `t` of the independent variable.
class NumericalError : public Error {
public:
  NumericalError(NumericalErrorKind kind, double t, const std::string& detail);

  NumericalErrorKind kind() const noexcept { return kind_; }
  double t() const noexcept { return t_; }
  const std::string& detail() const noexcept { return detail_; }

private:
  NumericalErrorKind kind_;
  double t_;
  std::string detail_;
};

class SingularGauge : public NumericalError {
public:
  SingularGauge(double t, double abs_det);
  double abs_det() const noexcept { return abs_det_; }

private:
  double abs_det_;
};

class RootCollision : public NumericalError {
public:
  RootCollision(double t, std::size_t i, std::size_t j);
  std::size_t first() const noexcept { return i_; }
  std::size_t second() const noexcept { return j_; }

private:
  std::size_t i_;
  std::size_t j_;
};

}  // namespace odesplit
