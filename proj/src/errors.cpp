#include "odesplit/errors.hpp"

#include <sstream>

namespace odesplit {

namespace {

std::string parse_message(std::size_t offset, const std::string& expected, std::string_view source) {
  std::ostringstream os;
  os << "syntax error at offset " << offset << ": " << expected << "\n  " << source << "\n  "
     << std::string(offset, ' ') << '^';
  return os.str();
}

std::string numerical_message(NumericalErrorKind kind, double t, const std::string& detail) {
  std::ostringstream os;
  os.precision(17);
  os << to_string(kind) << " at t=" << t;
  if (!detail.empty()) os << ": " << detail;
  return os.str();
}

}  // namespace

ParseError::ParseError(std::size_t offset, std::string expected, std::string_view source)
    : Error(parse_message(offset, expected, source)), offset_(offset), expected_(std::move(expected)) {}

std::string_view to_string(NumericalErrorKind kind) {
  switch (kind) {
    case NumericalErrorKind::EvalDomain: return "EvalDomain";
    case NumericalErrorKind::SingularGauge: return "SingularGauge";
    case NumericalErrorKind::RootCollision: return "RootCollision";
    case NumericalErrorKind::RiccatiBlowup: return "RiccatiBlowup";
    case NumericalErrorKind::StepUnderflow: return "StepUnderflow";
    case NumericalErrorKind::MaxSteps: return "MaxSteps";
    case NumericalErrorKind::BlowUp: return "BlowUp";
    case NumericalErrorKind::ZeroQ: return "ZeroQ";
    case NumericalErrorKind::ZeroCoefficient: return "ZeroCoefficient";
    case NumericalErrorKind::MaxDepth: return "MaxDepth";
    case NumericalErrorKind::LinearSolve: return "LinearSolve";
    case NumericalErrorKind::GridMismatch: return "GridMismatch";
    case NumericalErrorKind::EmptyOverlap: return "EmptyOverlap";
  }
  return "Unknown";
}

NumericalError::NumericalError(NumericalErrorKind kind, double t, const std::string& detail)
    : Error(numerical_message(kind, t, detail)), kind_(kind), t_(t), detail_(detail) {}

SingularGauge::SingularGauge(double t, double abs_det)
    : NumericalError(NumericalErrorKind::SingularGauge, t, "|D|=" + std::to_string(abs_det)),
      abs_det_(abs_det) {}

RootCollision::RootCollision(double t, std::size_t i, std::size_t j)
    : NumericalError(NumericalErrorKind::RootCollision, t,
                     "roots " + std::to_string(i) + " and " + std::to_string(j) + " coincide"),
      i_(i), j_(j) {}

}  // namespace odesplit
