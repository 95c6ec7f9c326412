#ifndef RFFQRNG_ERROR_HPP
#define RFFQRNG_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace rffqrng {

enum class ErrorCode {
  InvalidConfig,
  InvalidInput,
  TooFewEvents,
  NonMonotonicCrossings,
  LengthMismatch,
  EmptyStream,
  ConstantStream,
  LagTooLarge,
  InvalidBlockLength,
  BlockTooShort,
  PrerequisiteFailed,
  NoCompleteBlock,
  EmptyInput,
  TooFewSamples,
  IoError,
  FormatError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::TooFewEvents: return "TooFewEvents";
    case ErrorCode::NonMonotonicCrossings: return "NonMonotonicCrossings";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyStream: return "EmptyStream";
    case ErrorCode::ConstantStream: return "ConstantStream";
    case ErrorCode::LagTooLarge: return "LagTooLarge";
    case ErrorCode::InvalidBlockLength: return "InvalidBlockLength";
    case ErrorCode::BlockTooShort: return "BlockTooShort";
    case ErrorCode::PrerequisiteFailed: return "PrerequisiteFailed";
    case ErrorCode::NoCompleteBlock: return "NoCompleteBlock";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::FormatError: return "FormatError";
  }
  return "Unknown";
}

/// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rffqrng

#endif  // RFFQRNG_ERROR_HPP
