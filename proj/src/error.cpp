#include "terrafuse/error.hpp"

namespace terrafuse {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return "ConfigError";
    case ErrorKind::Io: return "IoError";
    case ErrorKind::Format: return "FormatError";
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::DuplicateBandName: return "DuplicateBandName";
    case ErrorKind::MissingBand: return "MissingBand";
    case ErrorKind::BandOrderMismatch: return "BandOrderMismatch";
    case ErrorKind::EmptyResult: return "EmptyResult";
    case ErrorKind::EmptyCollection: return "EmptyCollection";
    case ErrorKind::EmptyCounts: return "EmptyCounts";
    case ErrorKind::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorKind::EmptyValidationSet: return "EmptyValidationSet";
    case ErrorKind::EmptyMatrix: return "EmptyMatrix";
    case ErrorKind::AllSamplesDropped: return "AllSamplesDropped";
    case ErrorKind::InsufficientPixels: return "InsufficientPixels";
    case ErrorKind::MissingPaletteEntry: return "MissingPaletteEntry";
    case ErrorKind::LegendMismatch: return "LegendMismatch";
    case ErrorKind::PortInUse: return "PortInUse";
    case ErrorKind::Internal: return "InternalError";
  }
  return "InternalError";
}

}  // namespace terrafuse
