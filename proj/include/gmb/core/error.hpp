#pragma once

#include <stdexcept>
#include <string>

namespace gmb {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define GMB_DEFINE_ERROR(Name)                 \
  class Name : public Error {                  \
   public:                                     \
    explicit Name(const std::string& what)     \
        : Error(std::string(#Name ": ") + what) {} \
  }

GMB_DEFINE_ERROR(DegenerateNormalization);
GMB_DEFINE_ERROR(InvalidProbability);
GMB_DEFINE_ERROR(InvalidConfig);
GMB_DEFINE_ERROR(InvalidAction);
GMB_DEFINE_ERROR(InvalidInput);
GMB_DEFINE_ERROR(InvalidReward);
GMB_DEFINE_ERROR(InvalidPropensity);
GMB_DEFINE_ERROR(InfeasibleLambda);
GMB_DEFINE_ERROR(Unsupported);
GMB_DEFINE_ERROR(NoData);
GMB_DEFINE_ERROR(NotTrained);
GMB_DEFINE_ERROR(ShapeError);
GMB_DEFINE_ERROR(TrainingDiverged);
GMB_DEFINE_ERROR(IoError);

#undef GMB_DEFINE_ERROR

}  // namespace gmb
