#pragma once

#include <stdexcept>
#include <string>

namespace selfdec {

enum class ErrorCode {
  kInvalidArgument = 1,
  kInsufficientHorizon = 2,
  kNotContractive = 3,
  kSpectralCondition = 4,
  kConfig = 5,
  kIo = 6,
};

/// Exception carrying a category that the C API maps onto its return codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw Error(ErrorCode::kInvalidArgument, what);
}

}  // namespace selfdec
