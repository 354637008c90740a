#ifndef FASTRACK_PLANNING_H_
#define FASTRACK_PLANNING_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "fastrack/box.h"
#include "fastrack/relsys.h"

namespace fastrack {

// Obstacles are boxes over the planning position dimensions. Planners keep
// their current plan while it stays clear of the obstacles given each step. Entry k of
// `obstacles` applies to the state reached after k + 1 steps; the last entry
// applies to every later step.
struct PlannerInput {
  std::vector<double> state;
  std::vector<std::vector<Box>> obstacles;
  Box goal;
  Box bounds;
  double dt = 0.0;

  const std::vector<Box>& ObstaclesAt(std::size_t step) const;
};

struct PlannedStep {
  std::vector<double> next;
  // States after 1, 2, ... steps along the current plan, starting with next.
  std::vector<std::vector<double>> lookahead;
  // Planning control held over the step to next.
  std::vector<double> control;
  bool at_goal = false;
};

class Planner {
 public:
  virtual ~Planner() = default;
  // kPlannerStuck when no plan exists.
  virtual PlannedStep Next(const PlannerInput& in) = 0;
  // Largest position displacement in one step of length dt.
  virtual double MaxStep(double dt) const = 0;
};

struct GridPlannerConfig {
  // Lattice cell per planning dimension; 0 selects half the primitive
  // displacement for positions and 2 pi / 24 for headings.
  std::vector<double> resolution;
  // Steps each motion primitive holds its control.
  std::size_t primitive_steps = 4;
  // Control levels per planning control component, spread over the box.
  std::size_t control_levels = 3;
  std::size_t max_expansions = 2000000;
  std::size_t lookahead_steps = 200;
};

// Shortest-time search over a lattice of planning states. Motion primitives
// hold one control from a grid over the planning control box. Planned states
// at every step avoid the obstacles of that step and stay inside bounds.
class GridPlanner : public Planner {
 public:
  GridPlanner(PlanningModel model, GridPlannerConfig cfg);
  PlannedStep Next(const PlannerInput& in) override;
  double MaxStep(double dt) const override;

  std::size_t replans() const { return replans_; }

 private:
  bool Replan(const PlannerInput& in);
  bool PlanValid(const PlannerInput& in) const;

  PlanningModel model_;
  GridPlannerConfig cfg_;
  std::vector<std::vector<double>> controls_;
  // States after each step of the cached plan; plan_[0] is the state the
  // plan was made from.
  std::vector<std::vector<double>> plan_;
  // plan_u_[j] takes plan_[j] to plan_[j + 1].
  std::vector<std::vector<double>> plan_u_;
  std::size_t cursor_ = 0;
  std::size_t replans_ = 0;
};

struct RrtConfig {
  double step = 1.0;
  std::size_t max_iterations = 20000;
  std::size_t lookahead_steps = 200;
};

// Geometric RRT in position space for single-integrator planning models.
// The tree path is time-stamped at the per-dimension speed limits of the
// planning control box.
class RrtPlanner : public Planner {
 public:
  RrtPlanner(PlanningModel model, RrtConfig cfg, std::uint64_t seed);
  PlannedStep Next(const PlannerInput& in) override;
  double MaxStep(double dt) const override;

  std::size_t rebuilds() const { return rebuilds_; }
  // Waypoints of the current path, starting at the tree root.
  const std::vector<std::vector<double>>& path() const { return path_; }

 private:
  bool Rebuild(const PlannerInput& in);
  bool PathValid(const PlannerInput& in) const;
  // Position after time t along the remaining path.
  std::vector<double> Along(double t) const;

  PlanningModel model_;
  RrtConfig cfg_;
  std::mt19937_64 rng_;
  std::vector<double> speed_;
  std::vector<std::vector<double>> path_;
  // Cumulative arrival time of every waypoint.
  std::vector<double> arrival_;
  double elapsed_ = 0.0;
  std::size_t rebuilds_ = 0;
};

// Segment-box intersection (closed box).
bool SegmentHitsBox(std::span<const double> a, std::span<const double> b,
                    const Box& box);

// Time to traverse a segment with each dimension limited by its speed.
double TraversalTime(std::span<const double> a, std::span<const double> b,
                     std::span<const double> speed);

// Planning state after holding u_hat for dt: exact for single integrators,
// RK4 with substeps otherwise.
std::vector<double> IntegratePlanning(const PlanningModel& model,
                                      std::span<const double> p,
                                      std::span<const double> u_hat, double dt);

// Position components of a planning state.
std::vector<double> PlanningPosition(const PlanningModel& model,
                                     std::span<const double> p);

}  // namespace fastrack

#endif  // FASTRACK_PLANNING_H_
