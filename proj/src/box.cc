#include "fastrack/box.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "fastrack/error.h"

namespace fastrack {

const char* ToString(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kNotFound: return "not-found";
    case ErrorCode::kOutOfDomain: return "out-of-domain";
    case ErrorCode::kUnsupportedModel: return "unsupported-model";
    case ErrorCode::kNumericalFailure: return "numerical-failure";
    case ErrorCode::kInvalidDecomposition: return "invalid-decomposition";
    case ErrorCode::kDegenerate: return "degenerate";
    case ErrorCode::kGoalTooSmall: return "goal-too-small";
    case ErrorCode::kInitFailure: return "init-failure";
    case ErrorCode::kPlannerStuck: return "planner-stuck";
    case ErrorCode::kSensingTooSmall: return "sensing-too-small";
    case ErrorCode::kCorruptFile: return "corrupt-file";
    case ErrorCode::kHashMismatch: return "hash-mismatch";
    case ErrorCode::kSchema: return "schema";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message,
             std::optional<std::size_t> detail)
    : std::runtime_error(std::string(ToString(code)) + ": " + message),
      code_(code),
      detail_(detail) {}

Box::Box(std::vector<double> lo, std::vector<double> hi)
    : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.size() != hi_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "box bounds differ in dimension");
  }
  for (std::size_t i = 0; i < lo_.size(); ++i) {
    if (!(lo_[i] <= hi_[i]) || !std::isfinite(lo_[i]) ||
        !std::isfinite(hi_[i])) {
      throw Error(ErrorCode::kInvalidArgument,
                  "box lower bound exceeds upper bound in dimension " +
                      std::to_string(i));
    }
  }
}

Box::Box(std::vector<double> lo, std::vector<double> hi, Unchecked)
    : lo_(std::move(lo)), hi_(std::move(hi)) {}

Box Box::Symmetric(std::span<const double> half_widths) {
  std::vector<double> lo(half_widths.size());
  std::vector<double> hi(half_widths.size());
  for (std::size_t i = 0; i < half_widths.size(); ++i) {
    lo[i] = -half_widths[i];
    hi[i] = half_widths[i];
  }
  return Box(std::move(lo), std::move(hi));
}

Box Box::Symmetric(std::size_t dim, double half_width) {
  return Symmetric(std::vector<double>(dim, half_width));
}

std::vector<double> Box::midpoint() const {
  std::vector<double> m(dim());
  for (std::size_t i = 0; i < dim(); ++i) m[i] = mid(i);
  return m;
}

bool Box::Contains(std::span<const double> x, double tol) const {
  if (x.size() != dim()) return false;
  for (std::size_t i = 0; i < dim(); ++i) {
    if (x[i] < lo_[i] - tol || x[i] > hi_[i] + tol) return false;
  }
  return true;
}

bool Box::Intersects(const Box& other) const {
  if (other.dim() != dim()) return false;
  for (std::size_t i = 0; i < dim(); ++i) {
    if (other.hi_[i] < lo_[i] || other.lo_[i] > hi_[i]) return false;
  }
  return true;
}

bool Box::ContainsBox(const Box& other, double tol) const {
  if (other.dim() != dim()) return false;
  for (std::size_t i = 0; i < dim(); ++i) {
    if (other.lo_[i] < lo_[i] - tol || other.hi_[i] > hi_[i] + tol) {
      return false;
    }
  }
  return true;
}

Box Box::Expanded(std::span<const double> margin) const {
  std::vector<double> lo = lo_;
  std::vector<double> hi = hi_;
  for (std::size_t i = 0; i < dim() && i < margin.size(); ++i) {
    lo[i] -= margin[i];
    hi[i] += margin[i];
  }
  return Box(std::move(lo), std::move(hi), Unchecked{});
}

Box Box::Contracted(std::span<const double> margin) const {
  std::vector<double> neg(margin.begin(), margin.end());
  for (double& m : neg) m = -m;
  return Expanded(neg);
}

bool Box::Empty() const {
  for (std::size_t i = 0; i < dim(); ++i) {
    if (lo_[i] > hi_[i]) return true;
  }
  return false;
}

Box Box::Hull(const Box& other) const {
  std::vector<double> lo(dim());
  std::vector<double> hi(dim());
  for (std::size_t i = 0; i < dim(); ++i) {
    lo[i] = std::min(lo_[i], other.lo_[i]);
    hi[i] = std::max(hi_[i], other.hi_[i]);
  }
  return Box(std::move(lo), std::move(hi), Unchecked{});
}

std::vector<double> Box::Clamp(std::span<const double> x) const {
  std::vector<double> out(x.begin(), x.end());
  for (std::size_t i = 0; i < dim() && i < out.size(); ++i) {
    out[i] = std::clamp(out[i], lo_[i], hi_[i]);
  }
  return out;
}

}  // namespace fastrack
