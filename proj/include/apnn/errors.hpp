#pragma once

#include <stdexcept>
#include <string>

namespace apnn {

/// Base class for every failure raised by the library. `kind()` is a stable
/// machine-readable tag used in CLI error records.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define APNN_DEFINE_ERROR(Name)                                      \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string& what) : Error(#Name, what) {}   \
  };

APNN_DEFINE_ERROR(InvalidArgument)
APNN_DEFINE_ERROR(GramNotOrthonormal)
APNN_DEFINE_ERROR(NonPositiveFrequency)
APNN_DEFINE_ERROR(KernelMarginViolated)
APNN_DEFINE_ERROR(GapNonPositive)
APNN_DEFINE_ERROR(BandwidthViolation)
APNN_DEFINE_ERROR(ProjectionNotApplied)
APNN_DEFINE_ERROR(NonFiniteOutput)
APNN_DEFINE_ERROR(DivergedLoss)
APNN_DEFINE_ERROR(CflViolation)
APNN_DEFINE_ERROR(SingularImplicitSolve)
APNN_DEFINE_ERROR(GridMismatch)
APNN_DEFINE_ERROR(IoError)

#undef APNN_DEFINE_ERROR

/// Configuration problem tied to a specific (dotted) key.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error("ConfigError", what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace apnn
