#pragma once

#include <stdexcept>
#include <string>

namespace sensopt {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Assembly / state solves
struct NonSPD : Error { using Error::Error; };
struct SolveFailure : Error { using Error::Error; };
struct InvalidParameter : Error { using Error::Error; };
struct UnknownParameterComponent : Error { using Error::Error; };

// Sensors
struct LocationOutOfDomain : Error { using Error::Error; };
struct EmptyConfig : Error { using Error::Error; };
struct NotDifferentiable : Error { using Error::Error; };

// Information matrices / criteria
struct SingularFisher : Error { using Error::Error; };

struct NoConvergence : Error {
  NoConvergence(const std::string& msg, double residual)
      : Error(msg), residual(residual) {}
  double residual;
};

// Placement
struct EmptyPool : Error { using Error::Error; };
struct CombinatorialBlowup : Error { using Error::Error; };
struct NoDescent : Error { using Error::Error; };

// Analytic bar utilities
struct NotIncreasing : Error { using Error::Error; };
struct IndexOutOfRange : Error { using Error::Error; };

// Problem-file parsing; message is prefixed with the JSON path ("$.model.ell: ...").
struct SchemaError : Error { using Error::Error; };

}  // namespace sensopt
