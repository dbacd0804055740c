#pragma once

#include <stdexcept>
#include <string>

namespace srprofile {

enum class ErrorCode {
  InvalidDimension,
  InvalidScale,
  NotFiltered,
  InvalidOrder,
  ConstraintViolation,
  UnknownCatalogEntry,
  InvalidMetric,
  NotBracketGenerating,
  OutOfChart,
  SolverFailed,
  BudgetExceeded,
  EmptyInput,
  TooLarge,
  NotAMetric,
  NeedMoreSamples,
  GridMismatch,
  InvalidConfig,
  IoError,
};

inline const char* to_string(ErrorCode code)
{
  switch (code) {
    case ErrorCode::InvalidDimension: return "InvalidDimension";
    case ErrorCode::InvalidScale: return "InvalidScale";
    case ErrorCode::NotFiltered: return "NotFiltered";
    case ErrorCode::InvalidOrder: return "InvalidOrder";
    case ErrorCode::ConstraintViolation: return "ConstraintViolation";
    case ErrorCode::UnknownCatalogEntry: return "UnknownCatalogEntry";
    case ErrorCode::InvalidMetric: return "InvalidMetric";
    case ErrorCode::NotBracketGenerating: return "NotBracketGenerating";
    case ErrorCode::OutOfChart: return "OutOfChart";
    case ErrorCode::SolverFailed: return "SolverFailed";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::NotAMetric: return "NotAMetric";
    case ErrorCode::NeedMoreSamples: return "NeedMoreSamples";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error
{
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
  {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

/// Raised when a parametric family is instantiated with parameters that break a Jacobi relation.
class ConstraintViolation : public Error
{
public:
  ConstraintViolation(std::string relation, double residual)
      : Error(ErrorCode::ConstraintViolation,
              relation + " violated (residual " + std::to_string(residual) + ")"),
        relation_(std::move(relation)), residual_(residual)
  {}

  const std::string& relation() const noexcept { return relation_; }
  double residual() const noexcept { return residual_; }

private:
  std::string relation_;
  double residual_;
};

/// Raised when no certificate within tolerance was found. Carries the best residual seen.
class SolverFailed : public Error
{
public:
  SolverFailed(const std::string& what, double best_residual)
      : Error(ErrorCode::SolverFailed, what + " (best residual " + std::to_string(best_residual) + ")"),
        best_residual_(best_residual)
  {}

  double best_residual() const noexcept { return best_residual_; }

private:
  double best_residual_;
};

}  // namespace srprofile
