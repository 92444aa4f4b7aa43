#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace terrafuse {

/// Failure categories shared by every module. The CLI maps these onto
/// exit codes and the service onto HTTP status codes.
enum class ErrorKind {
  Config,
  Io,
  Format,
  Parse,
  DimensionMismatch,
  DuplicateBandName,
  MissingBand,
  BandOrderMismatch,
  EmptyResult,
  EmptyCollection,
  EmptyCounts,
  EmptyTrainingSet,
  EmptyValidationSet,
  EmptyMatrix,
  AllSamplesDropped,
  InsufficientPixels,
  MissingPaletteEntry,
  LegendMismatch,
  PortInUse,
  Internal,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace terrafuse
