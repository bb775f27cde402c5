#pragma once

#include <stdexcept>
#include <string>

namespace kerrcqa {

enum class ErrorKind {
  InvalidConfig,
  NegativeLoss,
  DegenerateKerr,
  DegenerateGauge,
  WrongRegime,
  NotBistable,
  NotNearBistable,
  Unsupported,
  InversionFailure,
  NonConvergence,
  PoleAtParameter,
  NoSolution,
  CutoffTooSmall,
  TruncationLoss,
  DegenerateKernel,
  ConvergenceFailure,
  RankDeficiency
};

inline const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::NegativeLoss: return "NegativeLoss";
    case ErrorKind::DegenerateKerr: return "DegenerateKerr";
    case ErrorKind::DegenerateGauge: return "DegenerateGauge";
    case ErrorKind::WrongRegime: return "WrongRegime";
    case ErrorKind::NotBistable: return "NotBistable";
    case ErrorKind::NotNearBistable: return "NotNearBistable";
    case ErrorKind::Unsupported: return "Unsupported";
    case ErrorKind::InversionFailure: return "InversionFailure";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::PoleAtParameter: return "PoleAtParameter";
    case ErrorKind::NoSolution: return "NoSolution";
    case ErrorKind::CutoffTooSmall: return "CutoffTooSmall";
    case ErrorKind::TruncationLoss: return "TruncationLoss";
    case ErrorKind::DegenerateKernel: return "DegenerateKernel";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::RankDeficiency: return "RankDeficiency";
  }
  return "Unknown";
}

// Input problems exit with 2, numerical failures with 3.
inline int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidConfig:
    case ErrorKind::NegativeLoss:
    case ErrorKind::DegenerateKerr:
    case ErrorKind::WrongRegime:
    case ErrorKind::NotBistable:
    case ErrorKind::NotNearBistable:
    case ErrorKind::Unsupported:
      return 2;
    default:
      return 3;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }
  const char* name() const { return kind_name(kind_); }

 private:
  ErrorKind kind_;
};

}  // namespace kerrcqa
