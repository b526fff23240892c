#pragma once

#include <stdexcept>
#include <string>

namespace mixident {

// Numeric values are part of the C ABI (see mixident.h); append only.
enum class ErrorCode : int {
  InvalidArgs = 1,
  NonPositiveWeight = 2,
  DimensionMismatch = 3,
  NotAProbability = 4,
  CapExceeded = 5,
  ShapeMismatch = 6,
  SplitMismatch = 7,
  NTooSmall = 8,
  TooManyColumns = 9,
  DependentSubset = 10,
  ZeroVector = 11,
  RankDeficientModes = 12,
  NoConvergence = 13,
  ContinuationStalled = 14,
  SeparationLost = 15,
  InvalidRegion = 16,
  VerificationFailed = 17,
  GenerationFailed = 18,
  ParseError = 19,
  Internal = 20,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace mixident
