#pragma once

#include <stdexcept>
#include <string>

namespace bronchopt {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define BRONCHOPT_DEFINE_ERROR(Name)          \
  class Name : public Error {                 \
   public:                                    \
    using Error::Error;                       \
  }

BRONCHOPT_DEFINE_ERROR(NonPositiveDepth);
BRONCHOPT_DEFINE_ERROR(EmptyDepth);
BRONCHOPT_DEFINE_ERROR(AmbiguousLog);
BRONCHOPT_DEFINE_ERROR(ParseError);
BRONCHOPT_DEFINE_ERROR(EmptyMesh);
BRONCHOPT_DEFINE_ERROR(NotWatertight);
BRONCHOPT_DEFINE_ERROR(BranchTooShort);
BRONCHOPT_DEFINE_ERROR(TooSmall);
BRONCHOPT_DEFINE_ERROR(DegenerateMap);
BRONCHOPT_DEFINE_ERROR(NoValidPairs);
BRONCHOPT_DEFINE_ERROR(IoError);
BRONCHOPT_DEFINE_ERROR(ManifestMismatch);
BRONCHOPT_DEFINE_ERROR(InvalidParams);
BRONCHOPT_DEFINE_ERROR(EmptyObservation);
BRONCHOPT_DEFINE_ERROR(NonFiniteLoss);
BRONCHOPT_DEFINE_ERROR(MalformedCsv);
BRONCHOPT_DEFINE_ERROR(SizeMismatch);

#undef BRONCHOPT_DEFINE_ERROR

}  // namespace bronchopt
