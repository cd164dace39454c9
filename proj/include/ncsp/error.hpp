#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ncsp {

// Integral edge weight.  Strictly positive, at most 2^60 per edge; path sums
// are overflow-checked so no silent wraparound is possible.
using Weight = std::int64_t;

inline constexpr Weight kMaxEdgeWeight = Weight{1} << 60;

enum class ErrorCode {
  NonPositiveWeight,
  WeightOverflow,
  BadRotation,
  EulerViolation,
  Disconnected,
  PositionNotOnFace,
  TerminalNotOnOuterFace,
  TerminalNotPendant,
  DuplicateTerminal,
  CrossingPairs,
  InternalInvariantViolation,
  StaleShortcut,
  UnknownPair,
  Unreachable,
  TooLarge,
  ParameterOutOfRange,
  MissingCoordinates,
  ParseError,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorCode::WeightOverflow: return "WeightOverflow";
    case ErrorCode::BadRotation: return "BadRotation";
    case ErrorCode::EulerViolation: return "EulerViolation";
    case ErrorCode::Disconnected: return "Disconnected";
    case ErrorCode::PositionNotOnFace: return "PositionNotOnFace";
    case ErrorCode::TerminalNotOnOuterFace: return "TerminalNotOnOuterFace";
    case ErrorCode::TerminalNotPendant: return "TerminalNotPendant";
    case ErrorCode::DuplicateTerminal: return "DuplicateTerminal";
    case ErrorCode::CrossingPairs: return "CrossingPairs";
    case ErrorCode::InternalInvariantViolation: return "InternalInvariantViolation";
    case ErrorCode::StaleShortcut: return "StaleShortcut";
    case ErrorCode::UnknownPair: return "UnknownPair";
    case ErrorCode::Unreachable: return "Unreachable";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::ParameterOutOfRange: return "ParameterOutOfRange";
    case ErrorCode::MissingCoordinates: return "MissingCoordinates";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(std::string(to_string(code)) + ": " + msg), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

inline void require(bool cond, ErrorCode code, const std::string& msg) {
  if (!cond) fail(code, msg);
}

inline Weight checked_add(Weight a, Weight b) {
  Weight r;
  if (__builtin_add_overflow(a, b, &r)) fail(ErrorCode::WeightOverflow, "weight sum overflow");
  return r;
}

}  // namespace ncsp
