#ifndef FASTRACK_ERROR_H_
#define FASTRACK_ERROR_H_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace fastrack {

enum class ErrorCode {
  kInvalidArgument,
  kNotFound,
  kOutOfDomain,
  kUnsupportedModel,
  kNumericalFailure,
  kInvalidDecomposition,
  kDegenerate,
  kGoalTooSmall,
  kInitFailure,
  kPlannerStuck,
  kSensingTooSmall,
  kCorruptFile,
  kHashMismatch,
  kSchema,
};

const char* ToString(ErrorCode code);

// Single exception type for the library. `detail` carries the offending
// dimension for kOutOfDomain and the step index for kNumericalFailure.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> detail = std::nullopt);

  ErrorCode code() const { return code_; }
  std::optional<std::size_t> detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> detail_;
};

}  // namespace fastrack

#endif  // FASTRACK_ERROR_H_
