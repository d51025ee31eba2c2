#pragma once

#include <stdexcept>
#include <string>

namespace leakscope {

// Base of every error the library throws. Each subclass corresponds to one
// named failure of a public operation; callers that only need a message can
// catch Error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define LEAKSCOPE_DEFINE_ERROR(Name)   \
  class Name : public Error {          \
   public:                             \
    using Error::Error;                \
  }

LEAKSCOPE_DEFINE_ERROR(DecodeError);
LEAKSCOPE_DEFINE_ERROR(SchemaError);
LEAKSCOPE_DEFINE_ERROR(UnsupportedKind);
LEAKSCOPE_DEFINE_ERROR(DuplicateStream);
LEAKSCOPE_DEFINE_ERROR(FlaggerError);
LEAKSCOPE_DEFINE_ERROR(EmptyStream);
LEAKSCOPE_DEFINE_ERROR(NoData);
LEAKSCOPE_DEFINE_ERROR(EmptyInput);
LEAKSCOPE_DEFINE_ERROR(MissingVerdicts);
LEAKSCOPE_DEFINE_ERROR(MissingSlot);
LEAKSCOPE_DEFINE_ERROR(MissingGroundTruth);
LEAKSCOPE_DEFINE_ERROR(MissingStream);
LEAKSCOPE_DEFINE_ERROR(SpecInvalid);
LEAKSCOPE_DEFINE_ERROR(ConfigError);
LEAKSCOPE_DEFINE_ERROR(StageOrderError);

#undef LEAKSCOPE_DEFINE_ERROR

// Raised once an LLM request has exhausted its retry budget.
class OracleError : public Error {
 public:
  OracleError(const std::string& what, int attempts)
      : Error(what), attempts_(attempts) {}
  int attempts() const { return attempts_; }

 private:
  int attempts_;
};

}  // namespace leakscope
