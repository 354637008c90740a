#ifndef FASTRACK_RELSYS_H_
#define FASTRACK_RELSYS_H_

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fastrack/box.h"

namespace fastrack {

// Control-affine decomposition of a flow evaluated at one state:
//   x_dot = drift + control * u + planning * u_hat + disturbance * d
// Matrices are row-major with one row per state dimension.
struct AffineTerms {
  std::vector<double> drift;
  std::vector<double> control;
  std::vector<double> planning;
  std::vector<double> disturbance;
  std::size_t n = 0;
  std::size_t n_control = 0;
  std::size_t n_planning = 0;
  std::size_t n_disturbance = 0;

  void Resize(std::size_t state_dim, std::size_t control_dim,
              std::size_t planning_dim, std::size_t disturbance_dim);
  // Zeroes every entry; model callbacks only write non-zeros.
  void Reset();

  double& B_u(std::size_t row, std::size_t col) {
    return control[row * n_control + col];
  }
  double& B_p(std::size_t row, std::size_t col) {
    return planning[row * n_planning + col];
  }
  double& B_d(std::size_t row, std::size_t col) {
    return disturbance[row * n_disturbance + col];
  }
};

using AffineFn = std::function<void(std::span<const double>, AffineTerms&)>;

// Evaluates drift + B_u u + B_p u_hat + B_d d. Empty spans are skipped.
std::vector<double> EvaluateAffine(const AffineFn& fn, std::size_t n,
                                   std::size_t n_control,
                                   std::size_t n_planning,
                                   std::size_t n_disturbance,
                                   std::span<const double> x,
                                   std::span<const double> u,
                                   std::span<const double> u_hat,
                                   std::span<const double> d);

struct TrackingModel {
  std::string name;
  std::vector<std::string> state_names;
  Box control;
  Box disturbance;
  AffineFn affine;

  std::size_t state_dim() const { return state_names.size(); }
  std::vector<double> Flow(std::span<const double> s,
                           std::span<const double> u,
                           std::span<const double> d) const;
};

// Disturbance-free planning dynamics.
struct PlanningModel {
  std::string name;
  std::vector<std::string> state_names;
  Box control;
  AffineFn affine;
  std::vector<std::size_t> position_dims;
  std::vector<std::size_t> velocity_dims;
  std::optional<std::size_t> heading_dim;
  // p_dot = u_hat with one control per position dimension.
  bool single_integrator = false;

  std::size_t state_dim() const { return state_names.size(); }
  std::vector<double> Flow(std::span<const double> p,
                           std::span<const double> u_hat) const;
};

// Weighted sum of squares over a set of relative-state dimensions.
struct ErrorTerm {
  std::vector<std::size_t> dims;
  std::vector<double> weights;
};

// l(r) = max over terms of sum_i w_i r_i^2.
class ErrorFunction {
 public:
  ErrorFunction() = default;
  explicit ErrorFunction(std::vector<ErrorTerm> terms);

  static ErrorFunction SumOfSquares(std::vector<std::size_t> dims,
                                    std::vector<double> weights = {});
  static ErrorFunction MaxOfSquares(std::vector<std::size_t> dims);

  double operator()(std::span<const double> r) const;
  const std::vector<ErrorTerm>& terms() const { return terms_; }
  // Every relative-state dimension the function reads.
  std::vector<std::size_t> dims() const;
  // Stable textual identifier, e.g. "max(1*r0^2+1*r1^2)".
  std::string id() const;

 private:
  std::vector<ErrorTerm> terms_;
};

enum class Transform { kIdentity, kPlanarRotation };

// Maps (r, planning control, bandwidth) to a tracking control before
// clipping to the control box.
using PerformanceFn =
    std::function<void(std::span<const double> r,
                       std::span<const double> planning_control,
                       double bandwidth, std::span<double> u)>;

struct RelativeSystem {
  std::string name;
  TrackingModel tracking;
  PlanningModel planning;
  Transform transform = Transform::kIdentity;
  // Rotation block: tracking position rows, planning heading column and the
  // tracking disturbance components that act on those positions.
  std::array<std::size_t, 2> rotated_dims{0, 1};
  std::size_t rotation_heading = 0;
  std::array<std::size_t, 2> rotated_disturbance{0, 1};
  // n_s x n_p state matching matrix, entries 0/1.
  std::vector<std::vector<int>> q;
  std::vector<std::size_t> error_dims;
  std::vector<std::size_t> aux_dims;
  // Periodic relative dimensions wrap to [-pi, pi).
  std::vector<bool> periodic;
  ErrorFunction error;
  // True when l reads auxiliary dimensions on purpose.
  bool error_reads_aux = false;
  AffineFn affine;
  PerformanceFn performance;
  // Default state-space truncation and resolution for precomputation.
  Box domain;
  std::vector<std::size_t> default_nodes;

  std::size_t dim() const { return tracking.state_dim(); }
  std::vector<std::string> state_names() const;
  // Throws kInvalidArgument when an invariant is broken.
  void Validate() const;
  // Planning column matched to a tracking row, if any.
  std::optional<std::size_t> MatchedPlanningDim(std::size_t row) const;
};

double WrapAngle(double a);

// r = Phi(s, p) (s - Q p).
std::vector<double> relative_state(std::span<const double> s,
                                   std::span<const double> p,
                                   const RelativeSystem& rel);

// g(r, u, u_hat, d). Inputs outside their boxes raise kInvalidArgument.
std::vector<double> relative_flow(const RelativeSystem& rel,
                                  std::span<const double> r,
                                  std::span<const double> u,
                                  std::span<const double> u_hat,
                                  std::span<const double> d);

// Relative-frame disturbance expressed in the tracking frame (inverse of the
// rotation block; identity otherwise).
std::vector<double> TrackingDisturbance(const RelativeSystem& rel,
                                        std::span<const double> p,
                                        std::span<const double> d_rel);

// Planning state whose matched components equal those of s (error states 0).
std::vector<double> ProjectToPlanning(const RelativeSystem& rel,
                                      std::span<const double> s);

// Tracking-state components matched to the planning position dimensions.
std::vector<double> TrackingPosition(const RelativeSystem& rel,
                                     std::span<const double> s);

}  // namespace fastrack

#endif  // FASTRACK_RELSYS_H_
