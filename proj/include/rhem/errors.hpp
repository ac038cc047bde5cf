#pragma once

#include <stdexcept>
#include <string>

namespace rhem {

// Error conditions surfaced by the engine. Tests match on the code, messages
// carry the offending ids/values for humans.
enum class ErrorCode {
  DuplicateFocalPaper,
  SelfReference,
  EmptySet,
  TimeRegression,
  UnknownCovariate,
  InapplicableCovariate,
  BadSubsetOrder,
  RiskSetTooSmall,
  SingularHessian,
  NoCaseInStratum,
  NoInformativeStrata,
  MalformedRecord,
  MissingField,
  ConfigInvalid,
  IoError,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace rhem
