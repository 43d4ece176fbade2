#pragma once

#include <stdexcept>
#include <string>

namespace okl {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define OKL_DEFINE_ERROR(NAME)                                   \
  class NAME : public Error {                                    \
  public:                                                        \
    explicit NAME(const std::string& msg) : Error(msg) {}        \
  }

// linear algebra
OKL_DEFINE_ERROR(NotSymmetric);
OKL_DEFINE_ERROR(IndefiniteEvenWithJitter);
OKL_DEFINE_ERROR(NonFiniteEncountered);
OKL_DEFINE_ERROR(StagnationDetected);
OKL_DEFINE_ERROR(DimensionMismatch);

// kernels
OKL_DEFINE_ERROR(IncompatibleInput);
OKL_DEFINE_ERROR(NegativeTime);

// solver
OKL_DEFINE_ERROR(SingularRowSystem);
OKL_DEFINE_ERROR(GridNotDescending);

// data ingestion
OKL_DEFINE_ERROR(ParseError);
OKL_DEFINE_ERROR(DuplicateEntry);
OKL_DEFINE_ERROR(IndexOverflow);
OKL_DEFINE_ERROR(EmptyDataset);
OKL_DEFINE_ERROR(UnknownMovieId);

// evaluation
OKL_DEFINE_ERROR(EmptyMask);
OKL_DEFINE_ERROR(MissingGroundTruth);
OKL_DEFINE_ERROR(EmptyPath);

// model persistence
OKL_DEFINE_ERROR(ModelFormatError);
OKL_DEFINE_ERROR(IncompatibleKernelInput);

#undef OKL_DEFINE_ERROR

}  // namespace okl
