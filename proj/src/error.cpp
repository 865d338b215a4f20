#include "csg/error.hpp"

namespace csg {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonPositiveProb: return "NonPositiveProb";
    case ErrorCode::SumNotOne: return "SumNotOne";
    case ErrorCode::IllegalAction: return "IllegalAction";
    case ErrorCode::UnknownName: return "UnknownName";
    case ErrorCode::BadParams: return "BadParams";
    case ErrorCode::BadEpsilon: return "BadEpsilon";
    case ErrorCode::NotFiniteMemory: return "NotFiniteMemory";
    case ErrorCode::KNotFound: return "KNotFound";
    case ErrorCode::UndecidableTail: return "UndecidableTail";
    case ErrorCode::ModeOutOfRange: return "ModeOutOfRange";
    case ErrorCode::BotCollision: return "BotCollision";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::UnsupportedAction: return "UnsupportedAction";
    case ErrorCode::NotInfiniteBranchingSpec: return "NotInfiniteBranchingSpec";
    case ErrorCode::NotTurnBased: return "NotTurnBased";
    case ErrorCode::NoProgress: return "NoProgress";
    case ErrorCode::PrivateMemory: return "PrivateMemory";
    case ErrorCode::HorizonRequired: return "HorizonRequired";
    case ErrorCode::TruncationTooSmall: return "TruncationTooSmall";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::EventNotPrefixDecidable: return "EventNotPrefixDecidable";
    case ErrorCode::TooFewReturns: return "TooFewReturns";
    case ErrorCode::WindowTooLarge: return "WindowTooLarge";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::AssertionFailed: return "AssertionFailed";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::NotFinite: return "NotFinite";
    case ErrorCode::InvariantViolated: return "InvariantViolated";
  }
  return "Unknown";
}

}  // namespace csg
