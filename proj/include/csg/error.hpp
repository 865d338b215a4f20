#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace csg {

// Every failure raised by the library carries one of these codes. The C API
// maps them one-to-one onto csg_status values.
enum class ErrorCode {
  NonPositiveProb = 1,
  SumNotOne,
  IllegalAction,
  UnknownName,
  BadParams,
  BadEpsilon,
  NotFiniteMemory,
  KNotFound,
  UndecidableTail,
  ModeOutOfRange,
  BotCollision,
  GridTooCoarse,
  UnsupportedAction,
  NotInfiniteBranchingSpec,
  NotTurnBased,
  NoProgress,
  PrivateMemory,
  HorizonRequired,
  TruncationTooSmall,
  SingularSystem,
  OutOfRange,
  EventNotPrefixDecidable,
  TooFewReturns,
  WindowTooLarge,
  ConfigInvalid,
  AssertionFailed,
  ParseError,
  IoError,
  NotFinite,
  InvariantViolated,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace csg
