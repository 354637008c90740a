#ifndef FASTRACK_TEB_H_
#define FASTRACK_TEB_H_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "fastrack/catalog.h"
#include "fastrack/hjsolver.h"
#include "fastrack/relsys.h"

namespace fastrack {

// Sublevel slack and the resulting level V_min + epsilon.
struct TebQuery {
  double epsilon = 0.0;
  double level = 0.0;
};

// Half-widths of a TEB projected onto the error dimensions.
struct TebExtents {
  double tau = 0.0;
  // Relative error dimensions, one half-width each.
  std::vector<std::size_t> dims;
  std::vector<double> half_width;
  // Largest Euclidean norm over the position error dimensions.
  double position_radius = 0.0;
  // True when the sublevel set reaches a node within kTrustedCells of a
  // non-periodic face.
  bool touches_boundary = false;

  // Half-width of a relative dimension; 0 for auxiliary dimensions.
  double HalfWidth(std::size_t rel_dim) const;
};

// V(r, tau) over the full relative state, composed as the max over
// independent parts. A single value function is a one-part bound.
class TrackingBound {
 public:
  TrackingBound(RelativeSystem rel, ValueFunction vf);
  // Parts are matched to subsystems by position. Non-converged parts must
  // share their snapshot times.
  TrackingBound(RelativeSystem rel, std::vector<Subsystem> subsystems,
                std::vector<ValueFunction> parts);

  const RelativeSystem& system() const { return rel_; }
  std::size_t num_parts() const { return parts_.size(); }
  const ValueFunction& part(std::size_t i) const { return parts_[i]; }
  const Subsystem& subsystem(std::size_t i) const { return subsystems_[i]; }

  // True when every part converged; tau is then ignored everywhere.
  bool converged() const { return times_.empty(); }
  // Horizon T of the non-converged parts; 0 when converged.
  double horizon() const { return converged() ? 0.0 : times_.back(); }
  // Stored horizons shared by the non-converged parts.
  const std::vector<double>& snapshot_times() const { return times_; }
  // Lookahead times tau = T - h over stored horizons h, ascending.
  std::vector<double> TebTimes() const;

  // max over parts of their minimum values.
  double min_value() const;
  // max over parts of their default epsilon.
  double default_epsilon() const;
  TebQuery Query(std::optional<double> epsilon = std::nullopt) const;

  // Interpolated V(r, T - tau) using the smallest stored horizon >= T - tau.
  // Out-of-grid r raises kOutOfDomain.
  double Value(std::span<const double> r, double tau) const;
  // Snapshot index of part i used for queries at tau.
  std::size_t CeilIndex(std::size_t i, double tau) const;
  // Snapshot index of part i whose sublevel set contains the one at tau.
  std::size_t FloorIndex(std::size_t i, double tau) const;

  // Part-local copy of the relative state.
  std::vector<double> PartState(std::size_t i, std::span<const double> r) const;

 private:
  void Check();

  RelativeSystem rel_;
  std::vector<Subsystem> subsystems_;
  std::vector<ValueFunction> parts_;
  std::vector<double> times_;
};

// Minimum over trusted nodes of the last snapshot; kDegenerate when no node
// is trusted.
double min_value(const ValueFunction& vf);
double min_value(const TrackingBound& tb);

// Interpolated V(r, T - tau) <= q.level. Out-of-grid r raises kOutOfDomain.
bool in_teb(const TrackingBound& tb, std::span<const double> r, double tau,
            const TebQuery& q);

// Smallest stored lookahead tau with in_teb true; nullopt when no snapshot
// contains r or r is off the grid.
std::optional<double> smallest_tau(const TrackingBound& tb,
                                   std::span<const double> r,
                                   const TebQuery& q);

// Exact node scan of the sublevel set at tau, using the largest stored
// horizon <= T - tau. An empty set raises kDegenerate.
TebExtents teb_extents(const TrackingBound& tb, double tau, const TebQuery& q);

// Extents for every entry of tb.TebTimes(), or one entry when converged.
std::vector<TebExtents> ExtentTable(const TrackingBound& tb,
                                    const TebQuery& q);

// Box-endpoint minimizer of grad V . g at (r, T - tau), per part.
std::vector<double> optimal_tracking_control(const TrackingBound& tb,
                                             std::span<const double> r,
                                             double tau);

struct WorstCase {
  std::vector<double> u_hat;
  std::vector<double> d;
};

// Planning control and disturbance maximizing grad V . g given the optimal
// tracking control.
WorstCase worst_case_inputs(const TrackingBound& tb, std::span<const double> r,
                            double tau);

// Obstacle margin per planning position dimension. Rotated position
// dimensions use position_radius.
std::vector<double> PositionMargins(const RelativeSystem& rel,
                                    const TebExtents& ext);
// Margin per planning velocity dimension.
std::vector<double> VelocityMargins(const RelativeSystem& rel,
                                    const TebExtents& ext);

}  // namespace fastrack

#endif  // FASTRACK_TEB_H_
