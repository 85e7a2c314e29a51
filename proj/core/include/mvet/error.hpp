#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mvet {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MVET_ERROR_TYPE(Name)          \
  class Name : public Error {          \
   public:                             \
    using Error::Error;                \
  }

// numeric
MVET_ERROR_TYPE(DimensionMismatch);
MVET_ERROR_TYPE(AllMasked);
MVET_ERROR_TYPE(NonFiniteValue);
MVET_ERROR_TYPE(NonFiniteFunctionValue);

// dataset
MVET_ERROR_TYPE(EmptyDataset);
MVET_ERROR_TYPE(EmptyStratumViolation);
MVET_ERROR_TYPE(ConfigInvalid);
MVET_ERROR_TYPE(DimMismatch);
MVET_ERROR_TYPE(UnknownType);

// views
MVET_ERROR_TYPE(DuplicateToken);
MVET_ERROR_TYPE(EmptyName);
MVET_ERROR_TYPE(EmptyDescription);
MVET_ERROR_TYPE(EmptyCorpus);
MVET_ERROR_TYPE(SourceMissing);

// fusion / model
MVET_ERROR_TYPE(AllViewsMissing);
MVET_ERROR_TYPE(TraceMismatch);
MVET_ERROR_TYPE(DomainError);

// trainer / eval
MVET_ERROR_TYPE(ShapeMismatch);
MVET_ERROR_TYPE(EmptySplit);
MVET_ERROR_TYPE(ViewUnknown);
MVET_ERROR_TYPE(NoExamples);
MVET_ERROR_TYPE(SpecMismatch);

#undef MVET_ERROR_TYPE

// Line-addressed parse failure for the text file formats.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& reason)
      : Error("line " + std::to_string(line) + ": " + reason), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace mvet
