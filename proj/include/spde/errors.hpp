#pragma once

#include <stdexcept>
#include <string>

namespace spde {

// Exit codes shared by every front end.
enum class ExitCode : int { Ok = 0, Validation = 2, Convergence = 3, Stability = 4 };

class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what, ExitCode code)
      : std::runtime_error(what), kind_(std::move(kind)), code_(code) {}

  const std::string& kind() const noexcept { return kind_; }
  ExitCode code() const noexcept { return code_; }

 private:
  std::string kind_;
  ExitCode code_;
};

#define SPDE_DEFINE_ERROR(Name, Code)                                  \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& what) : Error(#Name, what, Code) {} \
  };

SPDE_DEFINE_ERROR(DomainError, ExitCode::Validation)
SPDE_DEFINE_ERROR(PoleError, ExitCode::Validation)
SPDE_DEFINE_ERROR(DalangViolated, ExitCode::Validation)
SPDE_DEFINE_ERROR(TooLarge, ExitCode::Validation)
SPDE_DEFINE_ERROR(NotBalanced, ExitCode::Validation)
SPDE_DEFINE_ERROR(GeometryViolation, ExitCode::Validation)
SPDE_DEFINE_ERROR(ConvergenceFailure, ExitCode::Convergence)
SPDE_DEFINE_ERROR(StepTooCoarse, ExitCode::Convergence)
SPDE_DEFINE_ERROR(StabilityViolated, ExitCode::Stability)
SPDE_DEFINE_ERROR(InsufficientDomain, ExitCode::Stability)

#undef SPDE_DEFINE_ERROR

}  // namespace spde
