#pragma once

#include <stdexcept>
#include <string>

namespace gprel {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define GPREL_DEFINE_ERROR(Name)          \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  }

GPREL_DEFINE_ERROR(NotPositiveDefinite);
GPREL_DEFINE_ERROR(DimensionMismatch);
GPREL_DEFINE_ERROR(IndexOutOfRange);
GPREL_DEFINE_ERROR(OptimizationFailed);
GPREL_DEFINE_ERROR(UnsupportedOrder);
GPREL_DEFINE_ERROR(NonPositiveVariance);
GPREL_DEFINE_ERROR(NegativeVariance);
GPREL_DEFINE_ERROR(DegenerateInputs);
GPREL_DEFINE_ERROR(EmptyTestSet);
GPREL_DEFINE_ERROR(InsufficientResamples);
GPREL_DEFINE_ERROR(InvalidArgument);

#undef GPREL_DEFINE_ERROR

// Malformed input data. Carries the offending row/column when known
// (row is 1-based over data lines, i.e. excluding the header).
class DataError : public Error {
 public:
  explicit DataError(const std::string& what, long row = -1, std::string column = {})
      : Error(what), row_(row), column_(std::move(column)) {}
  long row() const { return row_; }
  const std::string& column() const { return column_; }

 private:
  long row_;
  std::string column_;
};

}  // namespace gprel
