#include "chainbalance/error.hpp"

namespace chainbalance {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kMissingLabelAttribute: return "MissingLabelAttribute";
    case ErrorKind::kMalformedArff: return "MalformedArff";
    case ErrorKind::kNonBinaryLabel: return "NonBinaryLabel";
    case ErrorKind::kAllLabelsDegenerate: return "AllLabelsDegenerate";
    case ErrorKind::kSingleClassInput: return "SingleClassInput";
    case ErrorKind::kSingleClassLabel: return "SingleClassLabel";
    case ErrorKind::kArityMismatch: return "ArityMismatch";
    case ErrorKind::kZeroMinorityCount: return "ZeroMinorityCount";
    case ErrorKind::kNoTrainableLabels: return "NoTrainableLabels";
    case ErrorKind::kLengthMismatch: return "LengthMismatch";
    case ErrorKind::kAllUndefined: return "AllUndefined";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace chainbalance
