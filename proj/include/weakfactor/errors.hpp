#pragma once

#include <stdexcept>
#include <string>

namespace weakfactor {

// Base class for all library failures. Catch this to flag (not drop) a
// replication in the Monte Carlo harness.
class Error : public std::runtime_error {
 public:
  Error(std::string name, const std::string& what)
      : std::runtime_error(name + ": " + what), name_(std::move(name)) {}

  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

namespace detail {
template <class Tag>
class TypedError : public Error {
 public:
  explicit TypedError(const std::string& what) : Error(Tag::name, what) {}
};
}  // namespace detail

#define WEAKFACTOR_ERROR(NAME)                         \
  struct NAME##Tag {                                   \
    static constexpr const char* name = #NAME;         \
  };                                                   \
  using NAME = detail::TypedError<NAME##Tag>

// core
WEAKFACTOR_ERROR(RankTooLarge);
WEAKFACTOR_ERROR(DegenerateSpectrum);
WEAKFACTOR_ERROR(ShapeMismatch);
// dgp
WEAKFACTOR_ERROR(NotSpd);
WEAKFACTOR_ERROR(NonStationary);
WEAKFACTOR_ERROR(InvalidBlock);
WEAKFACTOR_ERROR(InvalidScheme);
// estimator
WEAKFACTOR_ERROR(RankDeficientTruth);
WEAKFACTOR_ERROR(DegenerateTheta);
WEAKFACTOR_ERROR(DegenerateCrossProduct);
// leaveout
WEAKFACTOR_ERROR(SingularGram);
WEAKFACTOR_ERROR(IndexOutOfRange);
// inference
WEAKFACTOR_ERROR(SingularQ);
WEAKFACTOR_ERROR(DegenerateVariance);
WEAKFACTOR_ERROR(SingularCovariance);
WEAKFACTOR_ERROR(UnknownDgp);
// mc
WEAKFACTOR_ERROR(TooFewRecords);
WEAKFACTOR_ERROR(TooFewGridPoints);
WEAKFACTOR_ERROR(TooFewDraws);
WEAKFACTOR_ERROR(ConfigInvalid);
// cli
WEAKFACTOR_ERROR(ParseError);
WEAKFACTOR_ERROR(IoError);

#undef WEAKFACTOR_ERROR

}  // namespace weakfactor
