#ifndef FASTRACK_CONFIG_H_
#define FASTRACK_CONFIG_H_

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fastrack/catalog.h"
#include "fastrack/hjsolver.h"
#include "fastrack/planning.h"
#include "fastrack/sim.h"
#include "fastrack/teb.h"

namespace fastrack {

enum class PlannerKind { kGrid, kRrt };

struct PlannerConfig {
  PlannerKind kind = PlannerKind::kGrid;
  GridPlannerConfig grid;
  RrtConfig rrt;
  std::uint64_t seed = 0;
};

// One JSON document drives precomputation and simulation. Relative paths
// resolve against the directory holding the config file.
struct RunConfig {
  std::string model;
  std::map<std::string, double> params;
  // Solve the catalog decomposition instead of the full system.
  bool decompose = false;
  // One grid per solved system (per subsystem when decomposed). Empty uses
  // each system's default grid.
  std::vector<Grid> grids;
  SolverConfig solver;
  std::optional<double> epsilon;
  // Value function files, one per solved system.
  std::vector<std::string> value_files;

  bool has_scenario = false;
  Scenario scenario;
  PlannerConfig planner;

  ModelInstance Model() const;
  // Systems solved by precompute, in value_files order, with part names.
  std::vector<std::pair<std::string, RelativeSystem>> Parts(
      const ModelInstance& model) const;
};

// Parses and validates a config; every problem raises kSchema.
RunConfig ParseConfig(const std::string& json_text,
                      const std::string& base_dir = ".");
RunConfig LoadConfig(const std::string& path);

// Environment from its JSON object (bounds, obstacles, goal, sensor).
Environment ParseEnvironment(const std::string& json_text);

// Loads the value files of a config into a bound, checking each against the
// model and part it claims to belong to.
TrackingBound LoadBound(const RunConfig& cfg, const ModelInstance& model);

std::unique_ptr<Planner> MakePlanner(const PlannerConfig& cfg,
                                     const PlanningModel& model);

}  // namespace fastrack

#endif  // FASTRACK_CONFIG_H_
