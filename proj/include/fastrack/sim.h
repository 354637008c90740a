#ifndef FASTRACK_SIM_H_
#define FASTRACK_SIM_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "fastrack/planning.h"
#include "fastrack/teb.h"
#include "fastrack/world.h"

namespace fastrack {

enum class SwitchRule { kValueFraction, kErrorThreshold };
enum class ControllerMode { kOptimal, kPerformance };

struct HybridConfig {
  SwitchRule rule = SwitchRule::kValueFraction;
  // Optimal mode when V(r_next) >= fraction * (V_min + epsilon).
  double fraction = 0.25;
  // Optimal mode when l(r_next) >= threshold^2.
  double threshold = 0.0;
  // Bandwidth of the proportional-derivative performance controller.
  double bandwidth = 2.0;

  // Throws kInvalidArgument.
  void Validate() const;
};

struct HybridDecision {
  std::vector<double> u;
  ControllerMode mode = ControllerMode::kOptimal;
  // r_next was off the grid; optimal mode was forced.
  bool out_of_domain = false;
};

// Tracking control for the relative state r_next at lookahead tau.
HybridDecision hybrid_control(const TrackingBound& tb,
                              std::span<const double> r_next, double tau,
                              const TebQuery& q, const HybridConfig& cfg,
                              std::span<const double> planning_control = {});

enum class DisturbanceKind { kZero, kUniform, kAdversarial };

struct DisturbancePolicy {
  DisturbanceKind kind = DisturbanceKind::kZero;
  std::uint64_t seed = 0;
};

// Worst-case disturbance in the relative frame. Off the grid, each component
// takes the endpoint that increases the error function fastest.
std::vector<double> adversarial_disturbance(const TrackingBound& tb,
                                            std::span<const double> r,
                                            double tau);

// One RK4 step of the tracking dynamics with u and d held.
std::vector<double> step_tracking(const TrackingModel& model,
                                  std::span<const double> s,
                                  std::span<const double> u,
                                  std::span<const double> d, double dt);

struct Scenario {
  Environment env;
  // Initial tracking state.
  std::vector<double> start;
  double dt = 0.01;
  std::size_t max_steps = 10000;
  HybridConfig hybrid;
  DisturbancePolicy disturbance;
  // TEB slack; the bound's default when unset.
  std::optional<double> epsilon;
  // Augment with extents at the active lookahead; false uses the extents at
  // the horizon for every step.
  bool time_varying = true;
  // Accept a sensor smaller than the minimum sensing radius.
  bool allow_small_sensor = false;

  // Throws kInvalidArgument.
  void Validate() const;
};

struct SimStep {
  double time = 0.0;
  std::vector<double> s;
  std::vector<double> p;
  std::vector<double> r;
  // V(r, T - tau); NaN when r is off the grid.
  double value = 0.0;
  // Active lookahead; NaN when r lies in no stored TEB.
  double tau = 0.0;
  ControllerMode mode = ControllerMode::kOptimal;
  std::vector<double> u;
  std::vector<double> d;
  std::size_t sensed = 0;
  bool teb_violation = false;
  bool collision = false;
  bool out_of_bounds = false;
  // Wall time of the planner and controller calls of this step.
  double planner_seconds = 0.0;
  double controller_seconds = 0.0;
};

struct SimLog {
  double dt = 0.0;
  std::vector<std::string> tracking_names;
  std::vector<std::string> planning_names;
  std::vector<std::string> relative_names;
  std::vector<std::size_t> error_dims;
  std::vector<std::size_t> position_error_dims;
  std::vector<SimStep> steps;
  bool reached_goal = false;
  // Planning position margins at the horizon, used for the goal.
  std::vector<double> goal_margins;
};

// Runs the online loop with tracking state, planner and bound. The planner
// error propagates as kPlannerStuck after the log so far is stored in
// `partial` when given.
SimLog run_online(const TrackingBound& tb, Planner& planner,
                  const Scenario& sc, SimLog* partial = nullptr);

struct SimSummary {
  std::size_t steps = 0;
  bool reached_goal = false;
  // Time of the last logged step when the goal was reached.
  std::optional<double> time_to_goal;
  // Largest |r_i| per error dimension.
  std::vector<double> max_error;
  // Largest Euclidean norm over the position error dimensions.
  double max_position_error = 0.0;
  std::size_t teb_violations = 0;
  std::size_t collisions = 0;
  std::size_t out_of_bounds = 0;
  std::size_t mode_switches = 0;
  std::size_t optimal_steps = 0;
  // Largest rise of V above its value at the latest optimal-mode
  // engagement.
  double max_switch_excess = 0.0;
  double planner_seconds_mean = 0.0;
  double planner_seconds_max = 0.0;
  double controller_seconds_mean = 0.0;
  double controller_seconds_max = 0.0;
};

SimSummary metrics(const SimLog& log);

// One row per step; timing columns are omitted so equal runs give equal
// bytes.
void WriteCsv(const SimLog& log, std::ostream& out);
// JSON object with every SimSummary field.
std::string SummaryJson(const SimSummary& summary);

const char* ModeName(ControllerMode mode);

}  // namespace fastrack

#endif  // FASTRACK_SIM_H_
