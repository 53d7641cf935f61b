#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace treexplain {

enum class ErrorKind {
  // data
  MissingColumn,
  NonNumericCell,
  EmptyFile,
  SingleClass,
  DegenerateSplit,
  SingleClassTrainSet,
  DimensionMismatch,
  Io,
  // configuration
  InvalidSpec,
  EmptyAxis,
  TooManyFolds,
  BadClass,
  Parse,
  // runtime
  EmptyIndexSet,
  NearZeroDenominator,
  NoFeaturesUsed,
  AllInstancesSkipped,
};

// Coarse error classes; the CLI maps these onto exit codes.
enum class ErrorCategory { Data, Config, Runtime };

std::string_view to_string(ErrorKind kind);
ErrorCategory category_of(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }
  ErrorCategory category() const noexcept { return category_of(kind_); }

 private:
  ErrorKind kind_;
};

}  // namespace treexplain
