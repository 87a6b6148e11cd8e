#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace biopatch {

enum class ErrorCode {
  kRange,
  kPoolExhausted,
  kSizeMismatch,
  kTemplateShortage,
  kMixedPool,
  kDomain,
  kInfeasible,
  kShortage,
  kCoverageViolation,
  kUnknownId,
  kParse,
  kArity,
  kInvalidArgument,
  kFormat,
  kIo,
};

std::string_view to_string(ErrorCode code);

/// Base error for every failure the toolkit reports. `code()` identifies the
/// contract that was violated; the CLI maps kIo to exit status 2 and
/// everything else to 1.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct Warning {
  std::string code;
  std::string message;
};

using Warnings = std::vector<Warning>;

}  // namespace biopatch
