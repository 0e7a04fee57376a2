#include "motionskill/error.hpp"

namespace motionskill {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::MalformedRow: return "MalformedRow";
    case ErrorKind::DuplicateFrame: return "DuplicateFrame";
    case ErrorKind::GapTooLarge: return "GapTooLarge";
    case ErrorKind::EmptyTrack: return "EmptyTrack";
    case ErrorKind::OverlappingSegments: return "OverlappingSegments";
    case ErrorKind::WindowOutsideTrack: return "WindowOutsideTrack";
    case ErrorKind::MissingTool: return "MissingTool";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::MissingClass: return "MissingClass";
    case ErrorKind::CutoffAtOrAboveNyquist: return "CutoffAtOrAboveNyquist";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::SeriesTooShort: return "SeriesTooShort";
    case ErrorKind::NonFiniteInput: return "NonFiniteInput";
    case ErrorKind::EmptySeries: return "EmptySeries";
    case ErrorKind::MissingSegments: return "MissingSegments";
    case ErrorKind::AlreadyDropped: return "AlreadyDropped";
    case ErrorKind::EmptyMatrix: return "EmptyMatrix";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::RankDeficientRequest: return "RankDeficientRequest";
    case ErrorKind::TooFewSamplesPerClass: return "TooFewSamplesPerClass";
    case ErrorKind::SingleClassInput: return "SingleClassInput";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::SeriesTooLong: return "SeriesTooLong";
    case ErrorKind::DegenerateRange: return "DegenerateRange";
    case ErrorKind::MalformedReport: return "MalformedReport";
    case ErrorKind::UnknownSubcommand: return "UnknownSubcommand";
    case ErrorKind::ConfigConflict: return "ConfigConflict";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace motionskill
