#include "pulse_esprit/error.hpp"

#include <array>
#include <utility>

namespace pulse_esprit {
namespace {

constexpr std::array<std::pair<ErrorCode, std::string_view>, 25> kNames{{
    {ErrorCode::None, "none"},
    {ErrorCode::InvalidArgument, "InvalidArgument"},
    {ErrorCode::DimensionMismatch, "DimensionMismatch"},
    {ErrorCode::UnsupportedShape, "UnsupportedShape"},
    {ErrorCode::NegativeSigma, "NegativeSigma"},
    {ErrorCode::ZeroSignal, "ZeroSignal"},
    {ErrorCode::InvalidM, "InvalidM"},
    {ErrorCode::InvalidProbability, "InvalidProbability"},
    {ErrorCode::EmptySelection, "EmptySelection"},
    {ErrorCode::EigenFailure, "EigenFailure"},
    {ErrorCode::RankDeficient, "RankDeficient"},
    {ErrorCode::IllConditionedSubarray, "IllConditionedSubarray"},
    {ErrorCode::CardinalityMismatch, "CardinalityMismatch"},
    {ErrorCode::TooFewLocations, "TooFewLocations"},
    {ErrorCode::ZeroGain, "ZeroGain"},
    {ErrorCode::MissingField, "MissingField"},
    {ErrorCode::MissingTilde, "MissingTilde"},
    {ErrorCode::DegenerateM, "DegenerateM"},
    {ErrorCode::BelowThreshold, "BelowThreshold"},
    {ErrorCode::UnboundedSupport, "UnboundedSupport"},
    {ErrorCode::UnknownPreset, "UnknownPreset"},
    {ErrorCode::IoError, "IoError"},
    {ErrorCode::ParseError, "ParseError"},
    {ErrorCode::ConfigError, "ConfigError"},
    {ErrorCode::SchemaError, "SchemaError"},
}};

}  // namespace

std::string_view to_string(ErrorCode code) {
  for (const auto& [c, name] : kNames) {
    if (c == code) return name;
  }
  return "unknown";
}

ErrorCode error_code_from_string(std::string_view name) {
  for (const auto& [c, n] : kNames) {
    if (n == name) return c;
  }
  return ErrorCode::InvalidArgument;
}

}  // namespace pulse_esprit
