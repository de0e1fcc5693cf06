#pragma once

#include <stdexcept>
#include <string>

namespace dirac_loc {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : Error { using Error::Error; };
struct MembershipError : Error { using Error::Error; };
struct NumericalError : Error { using Error::Error; };
struct CoverageError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct DataQualityError : Error { using Error::Error; };

// Raised when the Green-kernel linear system is too ill-conditioned to solve.
struct SingularConfigurationError : NumericalError {
  double condition;
  SingularConfigurationError(const std::string& what, double cond)
      : NumericalError(what), condition(cond) {}
};

}  // namespace dirac_loc
