#pragma once

#include <stdexcept>
#include <string>

namespace hs {

enum class Err {
  NonPowerOfTwo,
  NonFiniteSample,
  GridMismatch,
  EmptyHeights,
  NonPositiveWeight,
  NoDualImplemented,
  SpecViolation,
  SupportViolation,
  SizeViolation,
  MeanNotZero,
  NotStronglyElliptic,
  SingularSymbol,
  NotRadial,
  CoincidentPoints,
  SplittingFailure,
  IllConditionedBasis,
  InvalidAtom,
  SpecScreenFailed,
  BadInput,
};

inline const char* err_name(Err e) {
  switch (e) {
    case Err::NonPowerOfTwo: return "NonPowerOfTwo";
    case Err::NonFiniteSample: return "NonFiniteSample";
    case Err::GridMismatch: return "GridMismatch";
    case Err::EmptyHeights: return "EmptyHeights";
    case Err::NonPositiveWeight: return "NonPositiveWeight";
    case Err::NoDualImplemented: return "NoDualImplemented";
    case Err::SpecViolation: return "SpecViolation";
    case Err::SupportViolation: return "SupportViolation";
    case Err::SizeViolation: return "SizeViolation";
    case Err::MeanNotZero: return "MeanNotZero";
    case Err::NotStronglyElliptic: return "NotStronglyElliptic";
    case Err::SingularSymbol: return "SingularSymbol";
    case Err::NotRadial: return "NotRadial";
    case Err::CoincidentPoints: return "CoincidentPoints";
    case Err::SplittingFailure: return "SplittingFailure";
    case Err::IllConditionedBasis: return "IllConditionedBasis";
    case Err::InvalidAtom: return "InvalidAtom";
    case Err::SpecScreenFailed: return "SpecScreenFailed";
    case Err::BadInput: return "BadInput";
  }
  return "Unknown";
}

/// Library-wide exception carrying a typed failure code.
class Error : public std::runtime_error {
 public:
  Error(Err code, const std::string& msg)
      : std::runtime_error(std::string(err_name(code)) + ": " + msg), code_(code) {}
  Err code() const { return code_; }

 private:
  Err code_;
};

[[noreturn]] inline void fail(Err code, const std::string& msg) { throw Error(code, msg); }

}  // namespace hs
