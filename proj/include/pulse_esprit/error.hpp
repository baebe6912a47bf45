#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pulse_esprit {

enum class ErrorCode {
  None = 0,
  InvalidArgument,
  DimensionMismatch,
  UnsupportedShape,
  NegativeSigma,
  ZeroSignal,
  InvalidM,
  InvalidProbability,
  EmptySelection,
  EigenFailure,
  RankDeficient,
  IllConditionedSubarray,
  CardinalityMismatch,
  TooFewLocations,
  ZeroGain,
  MissingField,
  MissingTilde,
  DegenerateM,
  BelowThreshold,
  UnboundedSupport,
  UnknownPreset,
  IoError,
  ParseError,
  ConfigError,
  SchemaError,
};

/// Stable identifier used in CSV records, JSON output and CLI messages.
std::string_view to_string(ErrorCode code);

/// Inverse of to_string; returns InvalidArgument for unknown names.
ErrorCode error_code_from_string(std::string_view name);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pulse_esprit
