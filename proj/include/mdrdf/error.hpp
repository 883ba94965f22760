#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mdrdf {

enum class ErrorCode {
  NonPositiveSpectrum,
  LagTooLarge,
  SingularToeplitz,
  DegenerateDistortion,
  RegionViolation,
  ZeroNoise,
  DenominatorSignError,
  DomainError,
  NegativeRadicand,
  MaskExceedsSource,
  TargetInfeasible,
  NoConvergence,
  SignalTooShort,
  LengthMismatch,
  InvalidConfig,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveSpectrum: return "NonPositiveSpectrum";
    case ErrorCode::LagTooLarge: return "LagTooLarge";
    case ErrorCode::SingularToeplitz: return "SingularToeplitz";
    case ErrorCode::DegenerateDistortion: return "DegenerateDistortion";
    case ErrorCode::RegionViolation: return "RegionViolation";
    case ErrorCode::ZeroNoise: return "ZeroNoise";
    case ErrorCode::DenominatorSignError: return "DenominatorSignError";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::NegativeRadicand: return "NegativeRadicand";
    case ErrorCode::MaskExceedsSource: return "MaskExceedsSource";
    case ErrorCode::TargetInfeasible: return "TargetInfeasible";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SignalTooShort: return "SignalTooShort";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace mdrdf
