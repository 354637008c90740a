#ifndef FASTRACK_WORLD_H_
#define FASTRACK_WORLD_H_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "fastrack/box.h"

namespace fastrack {

enum class SensorKind { kRadial, kFan };

struct SensorModel {
  SensorKind kind = SensorKind::kRadial;
  double radius = 1.0;
  // Fan only: half-angle about the vehicle heading, radians.
  double half_angle = 0.0;

  // Throws kInvalidArgument.
  void Validate() const;
};

// Obstacles and goal are boxes over the planning position dimensions.
struct Environment {
  Box bounds;
  std::vector<Box> obstacles;
  Box goal;
  SensorModel sensor;

  void Validate() const;
};

// True obstacles with the fragments sensed so far. Fragment i lies inside
// obstacle i and only grows.
class ConstraintState {
 public:
  ConstraintState() = default;
  explicit ConstraintState(std::vector<Box> obstacles);

  const std::vector<Box>& obstacles() const { return obstacles_; }
  const std::vector<std::optional<Box>>& fragments() const {
    return fragments_;
  }
  // Non-empty fragments in obstacle order.
  std::vector<Box> Sensed() const;
  std::size_t sensed_count() const;

  // Merges a revealed fragment of obstacle i; true when the sensed set grew.
  bool Reveal(std::size_t i, const Box& fragment);

 private:
  std::vector<Box> obstacles_;
  std::vector<std::optional<Box>> fragments_;
};

// Bounding box of obstacle and sensor region, clipped to the obstacle, for
// every obstacle the sensor reaches. The fan sector lies in the first two
// position dimensions and requires a heading.
std::vector<std::pair<std::size_t, Box>> SensorFootprints(
    const std::vector<Box>& obstacles, std::span<const double> position,
    std::optional<double> heading, const SensorModel& sensor);

// Reveals the sensor footprints in `state` and returns the fragments that
// are new or grew.
std::vector<Box> sense(ConstraintState& state, std::span<const double> position,
                       std::optional<double> heading,
                       const SensorModel& sensor);

// Each box grown by the per-dimension margin.
std::vector<Box> augment_constraints(const std::vector<Box>& sensed,
                                     std::span<const double> margins);

// One augmented set per lookahead step.
std::vector<std::vector<Box>> augment_over_horizon(
    const std::vector<Box>& sensed,
    const std::vector<std::vector<double>>& margins);

// Largest position extent plus the planner's largest step.
double min_sensing_radius(double position_extent, double planner_step);

// Goal shrunk by the margins; kGoalTooSmall when a margin reaches the goal
// half-width.
Box goal_contract(const Box& goal, std::span<const double> margins);

// Closed-box membership of any box.
bool InsideAny(const std::vector<Box>& boxes, std::span<const double> x);

}  // namespace fastrack

#endif  // FASTRACK_WORLD_H_
