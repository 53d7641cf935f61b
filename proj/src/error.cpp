#include "treexplain/error.hpp"

namespace treexplain {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::NonNumericCell: return "NonNumericCell";
    case ErrorKind::EmptyFile: return "EmptyFile";
    case ErrorKind::SingleClass: return "SingleClass";
    case ErrorKind::DegenerateSplit: return "DegenerateSplit";
    case ErrorKind::SingleClassTrainSet: return "SingleClassTrainSet";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::Io: return "Io";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::EmptyAxis: return "EmptyAxis";
    case ErrorKind::TooManyFolds: return "TooManyFolds";
    case ErrorKind::BadClass: return "BadClass";
    case ErrorKind::Parse: return "Parse";
    case ErrorKind::EmptyIndexSet: return "EmptyIndexSet";
    case ErrorKind::NearZeroDenominator: return "NearZeroDenominator";
    case ErrorKind::NoFeaturesUsed: return "NoFeaturesUsed";
    case ErrorKind::AllInstancesSkipped: return "AllInstancesSkipped";
  }
  return "Unknown";
}

ErrorCategory category_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingColumn:
    case ErrorKind::NonNumericCell:
    case ErrorKind::EmptyFile:
    case ErrorKind::SingleClass:
    case ErrorKind::DegenerateSplit:
    case ErrorKind::SingleClassTrainSet:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::Io:
      return ErrorCategory::Data;
    case ErrorKind::InvalidSpec:
    case ErrorKind::EmptyAxis:
    case ErrorKind::TooManyFolds:
    case ErrorKind::BadClass:
    case ErrorKind::Parse:
      return ErrorCategory::Config;
    case ErrorKind::EmptyIndexSet:
    case ErrorKind::NearZeroDenominator:
    case ErrorKind::NoFeaturesUsed:
    case ErrorKind::AllInstancesSkipped:
      return ErrorCategory::Runtime;
  }
  return ErrorCategory::Runtime;
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind) {}

}  // namespace treexplain
