#pragma once

#include <stdexcept>
#include <string>

namespace vexlab {

enum class ErrorKind {
  InvalidParameters,
  InvalidExponent,
  GridMismatch,
  NonConvergence,
  ZeroFunction,
  InfeasibleProblem,
  SupercriticalExponent,
  BallTooSmall,
  BubbleTouchesBoundary,
  TargetMassInfeasible,
  OverlappingSupports,
  MassBudgetExceeded,
  MissingLocalizedConstant,
  TooFewRecords,
  ParseError,
  ValidationError,
  IoError,
};

const char* to_string(ErrorKind kind);

/// Base exception for every failure raised by the library. The kind is the
/// stable, machine-readable part; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class SupercriticalExponentError : public Error {
 public:
  SupercriticalExponentError(std::size_t cell, double gap)
      : Error(ErrorKind::SupercriticalExponent,
              "q exceeds the Sobolev conjugate at cell " + std::to_string(cell) +
                  " (p* - q = " + std::to_string(gap) + ")"),
        cell_(cell) {}

  std::size_t cell() const noexcept { return cell_; }

 private:
  std::size_t cell_;
};

}  // namespace vexlab
