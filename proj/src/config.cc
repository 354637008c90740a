#include "fastrack/config.h"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "fastrack/error.h"
#include "fastrack/vf_io.h"
#include "json.hpp"

namespace fastrack {
namespace {

using Json = nlohmann::json;

constexpr std::size_t kMinNodes = 5;

[[noreturn]] void Schema(const std::string& where, const std::string& why) {
  throw Error(ErrorCode::kSchema, where + ": " + why);
}

void AllowedKeys(const Json& j, const std::string& where,
                 std::initializer_list<const char*> keys) {
  if (!j.is_object()) Schema(where, "expected an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) Schema(where, "unknown key '" + k + "'");
  }
}

double Number(const Json& j, const std::string& where) {
  if (!j.is_number()) Schema(where, "expected a number");
  return j.get<double>();
}

std::size_t Count(const Json& j, const std::string& where) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    Schema(where, "expected a non-negative integer");
  }
  return j.get<std::size_t>();
}

bool Flag(const Json& j, const std::string& where) {
  if (!j.is_boolean()) Schema(where, "expected true or false");
  return j.get<bool>();
}

std::string Text(const Json& j, const std::string& where) {
  if (!j.is_string()) Schema(where, "expected a string");
  return j.get<std::string>();
}

std::vector<double> Numbers(const Json& j, const std::string& where) {
  if (!j.is_array()) Schema(where, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(Number(j[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Box ParseBox(const Json& j, const std::string& where) {
  AllowedKeys(j, where, {"lo", "hi"});
  if (!j.contains("lo") || !j.contains("hi")) Schema(where, "needs lo and hi");
  const auto lo = Numbers(j["lo"], where + ".lo");
  const auto hi = Numbers(j["hi"], where + ".hi");
  if (lo.size() != hi.size() || lo.empty()) {
    Schema(where, "lo and hi must have the same non-zero length");
  }
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (!(lo[i] <= hi[i])) Schema(where, "lo must not exceed hi");
  }
  return Box(lo, hi);
}

Environment EnvironmentFrom(const Json& j, const std::string& where) {
  AllowedKeys(j, where, {"bounds", "obstacles", "goal", "sensor"});
  for (const char* k : {"bounds", "goal", "sensor"}) {
    if (!j.contains(k)) Schema(where, std::string("missing '") + k + "'");
  }
  Environment env;
  env.bounds = ParseBox(j["bounds"], where + ".bounds");
  env.goal = ParseBox(j["goal"], where + ".goal");
  if (j.contains("obstacles")) {
    const Json& obs = j["obstacles"];
    if (!obs.is_array()) Schema(where + ".obstacles", "expected an array");
    for (std::size_t i = 0; i < obs.size(); ++i) {
      env.obstacles.push_back(
          ParseBox(obs[i], where + ".obstacles[" + std::to_string(i) + "]"));
    }
  }
  const Json& s = j["sensor"];
  const std::string sw = where + ".sensor";
  AllowedKeys(s, sw, {"kind", "radius", "half_angle"});
  const std::string kind = s.contains("kind") ? Text(s["kind"], sw + ".kind")
                                              : std::string("radial");
  if (kind == "radial") {
    env.sensor.kind = SensorKind::kRadial;
  } else if (kind == "fan") {
    env.sensor.kind = SensorKind::kFan;
  } else {
    Schema(sw + ".kind", "expected 'radial' or 'fan'");
  }
  if (!s.contains("radius")) Schema(sw, "missing 'radius'");
  env.sensor.radius = Number(s["radius"], sw + ".radius");
  if (s.contains("half_angle")) {
    env.sensor.half_angle = Number(s["half_angle"], sw + ".half_angle");
  }
  try {
    env.Validate();
  } catch (const Error& e) {
    Schema(where, e.what());
  }
  return env;
}

SolverConfig SolverFrom(const Json& j) {
  const std::string w = "solver";
  AllowedKeys(j, w,
              {"horizon", "cfl", "tolerance", "snapshots", "max_steps",
               "stop_on_convergence", "monotone", "dissipation", "order"});
  SolverConfig c;
  if (j.contains("horizon")) c.horizon = Number(j["horizon"], w + ".horizon");
  if (j.contains("cfl")) c.cfl = Number(j["cfl"], w + ".cfl");
  if (j.contains("tolerance")) {
    c.tolerance = Number(j["tolerance"], w + ".tolerance");
  }
  if (j.contains("snapshots")) {
    c.snapshots = Count(j["snapshots"], w + ".snapshots");
  }
  if (j.contains("max_steps")) {
    c.max_steps = Count(j["max_steps"], w + ".max_steps");
  }
  if (j.contains("stop_on_convergence")) {
    c.stop_on_convergence =
        Flag(j["stop_on_convergence"], w + ".stop_on_convergence");
  }
  if (j.contains("monotone")) c.monotone = Flag(j["monotone"], w + ".monotone");
  if (j.contains("dissipation")) {
    const std::string d = Text(j["dissipation"], w + ".dissipation");
    if (d == "local-local") {
      c.dissipation = Dissipation::kLocalLocal;
    } else if (d == "global") {
      c.dissipation = Dissipation::kGlobal;
    } else {
      Schema(w + ".dissipation", "expected 'local-local' or 'global'");
    }
  }
  if (j.contains("order")) c.order = Count(j["order"], w + ".order");
  try {
    c.Validate();
  } catch (const Error& e) {
    Schema(w, e.what());
  }
  return c;
}

PlannerConfig PlannerFrom(const Json& j) {
  const std::string w = "scenario.planner";
  AllowedKeys(j, w,
              {"kind", "seed", "step", "max_iterations", "lookahead_steps",
               "primitive_steps", "control_levels", "max_expansions",
               "resolution"});
  PlannerConfig c;
  const std::string kind =
      j.contains("kind") ? Text(j["kind"], w + ".kind") : std::string("grid");
  if (kind == "grid") {
    c.kind = PlannerKind::kGrid;
  } else if (kind == "rrt") {
    c.kind = PlannerKind::kRrt;
  } else {
    Schema(w + ".kind", "expected 'grid' or 'rrt'");
  }
  if (j.contains("seed")) c.seed = Count(j["seed"], w + ".seed");
  if (j.contains("step")) c.rrt.step = Number(j["step"], w + ".step");
  if (j.contains("max_iterations")) {
    c.rrt.max_iterations = Count(j["max_iterations"], w + ".max_iterations");
  }
  if (j.contains("lookahead_steps")) {
    c.rrt.lookahead_steps = c.grid.lookahead_steps =
        Count(j["lookahead_steps"], w + ".lookahead_steps");
  }
  if (j.contains("primitive_steps")) {
    c.grid.primitive_steps =
        Count(j["primitive_steps"], w + ".primitive_steps");
  }
  if (j.contains("control_levels")) {
    c.grid.control_levels = Count(j["control_levels"], w + ".control_levels");
  }
  if (j.contains("max_expansions")) {
    c.grid.max_expansions = Count(j["max_expansions"], w + ".max_expansions");
  }
  if (j.contains("resolution")) {
    c.grid.resolution = Numbers(j["resolution"], w + ".resolution");
  }
  if (c.grid.primitive_steps == 0 || c.grid.control_levels == 0) {
    Schema(w, "primitive_steps and control_levels must be positive");
  }
  if (!(c.rrt.step > 0)) Schema(w + ".step", "must be positive");
  return c;
}

std::string Resolve(const std::string& base, const std::string& path) {
  const std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(base) / p).string();
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Json ParseJson(const std::string& text, const std::string& where) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    Schema(where, e.what());
  }
}

void ScenarioFrom(const Json& j, const std::string& base, RunConfig& cfg) {
  const std::string w = "scenario";
  AllowedKeys(j, w,
              {"environment", "start", "dt", "max_steps", "time_varying",
               "allow_small_sensor", "disturbance", "hybrid", "planner"});
  Scenario& sc = cfg.scenario;
  if (!j.contains("environment")) Schema(w, "missing 'environment'");
  const Json& env = j["environment"];
  if (env.is_string()) {
    const std::string path = Resolve(base, env.get<std::string>());
    sc.env = EnvironmentFrom(ParseJson(ReadFile(path), path), path);
  } else {
    sc.env = EnvironmentFrom(env, w + ".environment");
  }
  if (!j.contains("start")) Schema(w, "missing 'start'");
  sc.start = Numbers(j["start"], w + ".start");
  if (j.contains("dt")) sc.dt = Number(j["dt"], w + ".dt");
  if (j.contains("max_steps")) {
    sc.max_steps = Count(j["max_steps"], w + ".max_steps");
  }
  if (j.contains("time_varying")) {
    sc.time_varying = Flag(j["time_varying"], w + ".time_varying");
  }
  if (j.contains("allow_small_sensor")) {
    sc.allow_small_sensor =
        Flag(j["allow_small_sensor"], w + ".allow_small_sensor");
  }
  if (j.contains("disturbance")) {
    const Json& d = j["disturbance"];
    const std::string dw = w + ".disturbance";
    AllowedKeys(d, dw, {"kind", "seed"});
    const std::string kind =
        d.contains("kind") ? Text(d["kind"], dw + ".kind") : std::string("zero");
    if (kind == "zero") {
      sc.disturbance.kind = DisturbanceKind::kZero;
    } else if (kind == "uniform") {
      sc.disturbance.kind = DisturbanceKind::kUniform;
    } else if (kind == "adversarial") {
      sc.disturbance.kind = DisturbanceKind::kAdversarial;
    } else {
      Schema(dw + ".kind", "expected 'zero', 'uniform' or 'adversarial'");
    }
    if (d.contains("seed")) sc.disturbance.seed = Count(d["seed"], dw + ".seed");
  }
  if (j.contains("hybrid")) {
    const Json& h = j["hybrid"];
    const std::string hw = w + ".hybrid";
    AllowedKeys(h, hw, {"rule", "fraction", "threshold", "bandwidth"});
    if (h.contains("rule")) {
      const std::string rule = Text(h["rule"], hw + ".rule");
      if (rule == "value_fraction") {
        sc.hybrid.rule = SwitchRule::kValueFraction;
      } else if (rule == "error_threshold") {
        sc.hybrid.rule = SwitchRule::kErrorThreshold;
      } else {
        Schema(hw + ".rule", "expected 'value_fraction' or 'error_threshold'");
      }
    }
    if (sc.hybrid.rule == SwitchRule::kValueFraction && h.contains("threshold")) {
      Schema(hw, "'threshold' needs rule 'error_threshold'");
    }
    if (sc.hybrid.rule == SwitchRule::kErrorThreshold) {
      if (h.contains("fraction")) {
        Schema(hw, "'fraction' needs rule 'value_fraction'");
      }
      if (!h.contains("threshold")) Schema(hw, "missing 'threshold'");
    }
    if (h.contains("fraction")) {
      sc.hybrid.fraction = Number(h["fraction"], hw + ".fraction");
    }
    if (h.contains("threshold")) {
      sc.hybrid.threshold = Number(h["threshold"], hw + ".threshold");
    }
    if (h.contains("bandwidth")) {
      sc.hybrid.bandwidth = Number(h["bandwidth"], hw + ".bandwidth");
    }
  }
  if (j.contains("planner")) cfg.planner = PlannerFrom(j["planner"]);
  try {
    sc.Validate();
  } catch (const Error& e) {
    Schema(w, e.what());
  }
}

}  // namespace

ModelInstance RunConfig::Model() const { return make_model(model, params); }

std::vector<std::pair<std::string, RelativeSystem>> RunConfig::Parts(
    const ModelInstance& m) const {
  std::vector<std::pair<std::string, RelativeSystem>> out;
  if (!decompose) {
    out.emplace_back("", m.system);
    return out;
  }
  for (const Subsystem& s : m.subsystems) out.emplace_back(s.name, s.system);
  return out;
}

RunConfig ParseConfig(const std::string& json_text, const std::string& base) {
  const Json j = ParseJson(json_text, "config");
  AllowedKeys(j, "config",
              {"model", "params", "decompose", "grids", "solver", "epsilon",
               "value_files", "scenario"});
  RunConfig cfg;
  if (!j.contains("model")) Schema("config", "missing 'model'");
  cfg.model = Text(j["model"], "model");
  if (j.contains("params")) {
    if (!j["params"].is_object()) Schema("params", "expected an object");
    for (const auto& [k, v] : j["params"].items()) {
      cfg.params[k] = Number(v, "params." + k);
    }
  }
  ModelInstance model;
  try {
    model = cfg.Model();
  } catch (const Error& e) {
    Schema("model", e.what());
  }
  if (j.contains("decompose")) cfg.decompose = Flag(j["decompose"], "decompose");
  if (cfg.decompose && model.subsystems.empty()) {
    Schema("decompose", model.name + " has no decomposition");
  }
  const auto parts = cfg.Parts(model);
  if (j.contains("grids")) {
    const Json& grids = j["grids"];
    if (!grids.is_array() || grids.size() != parts.size()) {
      Schema("grids", "expected one grid per solved system (" +
                          std::to_string(parts.size()) + ")");
    }
    for (std::size_t k = 0; k < grids.size(); ++k) {
      const std::string w = "grids[" + std::to_string(k) + "]";
      const Json& g = grids[k];
      AllowedKeys(g, w, {"lo", "hi", "nodes"});
      if (!g.contains("lo") || !g.contains("hi") || !g.contains("nodes")) {
        Schema(w, "needs lo, hi and nodes");
      }
      const auto lo = Numbers(g["lo"], w + ".lo");
      const auto hi = Numbers(g["hi"], w + ".hi");
      if (!g["nodes"].is_array()) Schema(w + ".nodes", "expected an array");
      const RelativeSystem& sys = parts[k].second;
      if (lo.size() != sys.dim() || hi.size() != sys.dim() ||
          g["nodes"].size() != sys.dim()) {
        Schema(w, "expected " + std::to_string(sys.dim()) + " dimensions");
      }
      std::vector<GridDim> dims;
      for (std::size_t d = 0; d < sys.dim(); ++d) {
        const std::size_t n =
            Count(g["nodes"][d], w + ".nodes[" + std::to_string(d) + "]");
        if (n < kMinNodes) {
          Schema(w, "every dimension needs at least " +
                        std::to_string(kMinNodes) + " nodes");
        }
        if (!(lo[d] < hi[d])) Schema(w, "lo must be below hi");
        dims.push_back({lo[d], hi[d], n, static_cast<bool>(sys.periodic[d])});
      }
      cfg.grids.emplace_back(std::move(dims));
    }
  }
  if (j.contains("solver")) cfg.solver = SolverFrom(j["solver"]);
  if (j.contains("epsilon")) {
    cfg.epsilon = Number(j["epsilon"], "epsilon");
    if (!(*cfg.epsilon >= 0)) Schema("epsilon", "must be >= 0");
  }
  if (j.contains("value_files")) {
    const Json& f = j["value_files"];
    if (!f.is_array() || f.size() != parts.size()) {
      Schema("value_files", "expected one file per solved system (" +
                                std::to_string(parts.size()) + ")");
    }
    for (std::size_t k = 0; k < f.size(); ++k) {
      cfg.value_files.push_back(
          Resolve(base, Text(f[k], "value_files[" + std::to_string(k) + "]")));
    }
  }
  if (j.contains("scenario")) {
    cfg.has_scenario = true;
    ScenarioFrom(j["scenario"], base, cfg);
    if (cfg.scenario.start.size() != model.system.dim()) {
      Schema("scenario.start", "expected " +
                                   std::to_string(model.system.dim()) +
                                   " tracking states");
    }
    if (cfg.planner.kind == PlannerKind::kRrt &&
        !model.system.planning.single_integrator) {
      Schema("scenario.planner", "rrt needs a single-integrator planning model");
    }
    cfg.scenario.epsilon = cfg.epsilon;
  }
  return cfg;
}

RunConfig LoadConfig(const std::string& path) {
  const std::string dir =
      std::filesystem::path(path).parent_path().string();
  return ParseConfig(ReadFile(path), dir.empty() ? "." : dir);
}

Environment ParseEnvironment(const std::string& json_text) {
  return EnvironmentFrom(ParseJson(json_text, "environment"), "environment");
}

TrackingBound LoadBound(const RunConfig& cfg, const ModelInstance& model) {
  const auto parts = cfg.Parts(model);
  if (cfg.value_files.size() != parts.size()) {
    throw Error(ErrorCode::kSchema, "value_files: expected " +
                                        std::to_string(parts.size()) +
                                        " files");
  }
  std::vector<ValueFunction> vfs;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    vfs.push_back(
        LoadValueFunction(cfg.value_files[k], model, parts[k].first));
  }
  if (!cfg.decompose) return TrackingBound(model.system, std::move(vfs[0]));
  return TrackingBound(model.system, model.subsystems, std::move(vfs));
}

std::unique_ptr<Planner> MakePlanner(const PlannerConfig& cfg,
                                     const PlanningModel& model) {
  if (cfg.kind == PlannerKind::kRrt) {
    return std::make_unique<RrtPlanner>(model, cfg.rrt, cfg.seed);
  }
  return std::make_unique<GridPlanner>(model, cfg.grid);
}

}  // namespace fastrack
