#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace chainbalance {

enum class ErrorKind {
  kMissingLabelAttribute,
  kMalformedArff,
  kNonBinaryLabel,
  kAllLabelsDegenerate,
  kSingleClassInput,
  kSingleClassLabel,
  kArityMismatch,
  kZeroMinorityCount,
  kNoTrainableLabels,
  kLengthMismatch,
  kAllUndefined,
  kInvalidArgument,
  kIo,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so callers (and the CLI's
// exit-code mapping) can dispatch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace chainbalance
