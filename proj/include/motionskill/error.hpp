#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace motionskill {

enum class ErrorKind {
  // motion data
  MalformedRow,
  DuplicateFrame,
  GapTooLarge,
  EmptyTrack,
  OverlappingSegments,
  WindowOutsideTrack,
  MissingTool,
  EmptyDataset,
  MissingClass,
  // filtering and kinematics
  CutoffAtOrAboveNyquist,
  InvalidConfig,
  SeriesTooShort,
  NonFiniteInput,
  EmptySeries,
  MissingSegments,
  AlreadyDropped,
  // preprocessing
  EmptyMatrix,
  DimensionMismatch,
  RankDeficientRequest,
  // classifiers
  TooFewSamplesPerClass,
  SingleClassInput,
  NonFiniteLoss,
  LengthMismatch,
  // rasterization
  SeriesTooLong,
  DegenerateRange,
  // reporting / cli
  MalformedReport,
  UnknownSubcommand,
  ConfigConflict,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace motionskill
