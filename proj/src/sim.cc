#include "fastrack/sim.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "fastrack/error.h"
#include "json.hpp"

namespace fastrack {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kTimeTol = 1e-9;

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

// r with each part's coordinates clamped onto that part's grid.
std::vector<double> ClampToGrids(const TrackingBound& tb,
                                 std::span<const double> r) {
  std::vector<double> out(r.begin(), r.end());
  for (std::size_t i = 0; i < tb.num_parts(); ++i) {
    const Grid& g = tb.part(i).grid;
    const auto& dims = tb.subsystem(i).state_dims;
    for (std::size_t k = 0; k < dims.size(); ++k) {
      if (g.dim(k).periodic) continue;
      out[dims[k]] = std::clamp(out[dims[k]], g.dim(k).lo, g.dim(k).hi);
    }
  }
  return out;
}

bool OnGrid(const TrackingBound& tb, std::span<const double> r) {
  for (std::size_t i = 0; i < tb.num_parts(); ++i) {
    if (!InDomain(tb.part(i).grid, tb.PartState(i, r))) return false;
  }
  return true;
}

// Relative dimensions matched to the planning position dimensions.
std::vector<std::size_t> PositionErrorDims(const RelativeSystem& rel) {
  std::vector<std::size_t> out;
  for (std::size_t pd : rel.planning.position_dims) {
    for (std::size_t i = 0; i < rel.q.size(); ++i) {
      if (rel.q[i][pd] != 0) out.push_back(i);
    }
  }
  return out;
}

std::optional<double> TrackingHeading(const RelativeSystem& rel,
                                      std::span<const double> s) {
  if (!rel.planning.heading_dim) return std::nullopt;
  for (std::size_t i = 0; i < rel.q.size(); ++i) {
    if (rel.q[i][*rel.planning.heading_dim] != 0) return s[i];
  }
  return std::nullopt;
}

void AppendNumber(std::string& line, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  line += buf;
}

}  // namespace

void HybridConfig::Validate() const {
  if (rule == SwitchRule::kValueFraction && !(fraction > 0 && fraction <= 1)) {
    throw Error(ErrorCode::kInvalidArgument,
                "value fraction must lie in (0, 1]");
  }
  if (rule == SwitchRule::kErrorThreshold && !(threshold >= 0)) {
    throw Error(ErrorCode::kInvalidArgument, "error threshold must be >= 0");
  }
  if (!(bandwidth > 0) || !std::isfinite(bandwidth)) {
    throw Error(ErrorCode::kInvalidArgument, "bandwidth must be positive");
  }
}

HybridDecision hybrid_control(const TrackingBound& tb,
                              std::span<const double> r_next, double tau,
                              const TebQuery& q, const HybridConfig& cfg,
                              std::span<const double> planning_control) {
  const RelativeSystem& rel = tb.system();
  HybridDecision out;
  out.out_of_domain = !OnGrid(tb, r_next);
  bool optimal = true;
  if (!out.out_of_domain) {
    if (cfg.rule == SwitchRule::kValueFraction) {
      const double v = tb.Value(r_next, tau);
      optimal = !(v < cfg.fraction * q.level);
    } else {
      optimal = !(rel.error(r_next) < cfg.threshold * cfg.threshold);
    }
  }
  if (optimal) {
    out.mode = ControllerMode::kOptimal;
    out.u = optimal_tracking_control(tb, ClampToGrids(tb, r_next), tau);
    return out;
  }
  out.mode = ControllerMode::kPerformance;
  std::vector<double> u(rel.tracking.control.dim(), 0.0);
  rel.performance(r_next, planning_control, cfg.bandwidth, u);
  out.u = rel.tracking.control.Clamp(u);
  return out;
}

std::vector<double> adversarial_disturbance(const TrackingBound& tb,
                                            std::span<const double> r,
                                            double tau) {
  if (OnGrid(tb, r)) return worst_case_inputs(tb, r, tau).d;
  const RelativeSystem& rel = tb.system();
  const std::size_t n = rel.dim();
  std::vector<double> grad(n);
  std::vector<double> x(r.begin(), r.end());
  for (std::size_t i = 0; i < n; ++i) {
    const double h = 1e-6 * (1.0 + std::abs(r[i]));
    x[i] = r[i] + h;
    const double up = rel.error(x);
    x[i] = r[i] - h;
    const double down = rel.error(x);
    x[i] = r[i];
    grad[i] = (up - down) / (2.0 * h);
  }
  AffineTerms t;
  t.Resize(n, rel.tracking.control.dim(), rel.planning.control.dim(),
           rel.tracking.disturbance.dim());
  t.Reset();
  rel.affine(r, t);
  const Box& box = rel.tracking.disturbance;
  std::vector<double> d(box.dim());
  for (std::size_t j = 0; j < box.dim(); ++j) {
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i) c += grad[i] * t.B_d(i, j);
    d[j] = c >= 0.0 ? box.hi(j) : box.lo(j);
  }
  return d;
}

std::vector<double> step_tracking(const TrackingModel& model,
                                  std::span<const double> s,
                                  std::span<const double> u,
                                  std::span<const double> d, double dt) {
  const std::size_t n = s.size();
  std::vector<double> tmp(n);
  const auto k1 = model.Flow(s, u, d);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = s[i] + 0.5 * dt * k1[i];
  const auto k2 = model.Flow(tmp, u, d);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = s[i] + 0.5 * dt * k2[i];
  const auto k3 = model.Flow(tmp, u, d);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = s[i] + dt * k3[i];
  const auto k4 = model.Flow(tmp, u, d);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = s[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return out;
}

void Scenario::Validate() const {
  env.Validate();
  hybrid.Validate();
  if (!(dt > 0) || !std::isfinite(dt)) {
    throw Error(ErrorCode::kInvalidArgument, "time step must be positive");
  }
  if (epsilon && !(*epsilon >= 0)) {
    throw Error(ErrorCode::kInvalidArgument, "epsilon must be >= 0");
  }
}

SimLog run_online(const TrackingBound& tb, Planner& planner,
                  const Scenario& sc, SimLog* partial) {
  sc.Validate();
  const RelativeSystem& rel = tb.system();
  if (sc.start.size() != rel.dim()) {
    throw Error(ErrorCode::kInvalidArgument,
                "start state dimension differs from the tracking model");
  }
  if (sc.env.bounds.dim() != rel.planning.position_dims.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "world dimension differs from the planning positions");
  }
  const TebQuery q = tb.Query(sc.epsilon);
  const std::vector<TebExtents> table = ExtentTable(tb, q);
  const std::vector<double> times =
      tb.converged() ? std::vector<double>{0.0} : tb.TebTimes();
  std::vector<std::vector<double>> margins;
  for (const TebExtents& e : table) margins.push_back(PositionMargins(rel, e));
  const std::vector<double>& widest = margins.back();

  const double reach = *std::max_element(widest.begin(), widest.end());
  const double needed = min_sensing_radius(reach, planner.MaxStep(sc.dt));
  if (!sc.allow_small_sensor && sc.env.sensor.radius < needed) {
    throw Error(ErrorCode::kSensingTooSmall,
                "sensor radius is below the minimum sensing radius " +
                    std::to_string(needed));
  }
  const Box goal = goal_contract(sc.env.goal, widest);
  for (std::size_t i = 0; i < widest.size(); ++i) {
    if (widest[i] >= sc.env.bounds.half_width(i)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "world is smaller than the tracking error bound");
    }
  }
  const Box bounds = sc.env.bounds.Contracted(widest);

  SimLog log;
  log.dt = sc.dt;
  log.tracking_names = rel.tracking.state_names;
  log.planning_names = rel.planning.state_names;
  log.relative_names = rel.state_names();
  log.error_dims = rel.error_dims;
  log.position_error_dims = PositionErrorDims(rel);
  log.goal_margins = widest;

  std::vector<double> s = sc.start;
  std::vector<double> p = ProjectToPlanning(rel, s);
  {
    const std::vector<double> r0 = relative_state(s, p, rel);
    if (!OnGrid(tb, r0) || !in_teb(tb, r0, 0.0, q)) {
      throw Error(ErrorCode::kInitFailure,
                  "initial relative state lies outside the TEB");
    }
  }

  ConstraintState world(sc.env.obstacles);
  std::mt19937_64 rng(sc.disturbance.seed);
  const Box& dbox = rel.tracking.disturbance;

  for (std::size_t k = 0;; ++k) {
    SimStep row;
    row.time = static_cast<double>(k) * sc.dt;
    row.s = s;
    row.p = p;
    row.r = relative_state(s, p, rel);
    const bool on_grid = OnGrid(tb, row.r);
    std::optional<double> tau;
    if (on_grid) {
      if (tb.converged()) {
        if (in_teb(tb, row.r, 0.0, q)) tau = 0.0;
      } else {
        tau = smallest_tau(tb, row.r, q);
      }
    }
    row.teb_violation = !tau.has_value();
    row.tau = tau.value_or(kNaN);
    const double active = tau.value_or(times.back());
    row.value = on_grid ? tb.Value(row.r, active) : kNaN;
    const std::vector<double> pos = TrackingPosition(rel, s);
    row.collision = InsideAny(sc.env.obstacles, pos);
    row.out_of_bounds = !sc.env.bounds.Contains(pos);

    sense(world, pos, TrackingHeading(rel, s), sc.env.sensor);
    row.sensed = world.sensed_count();
    if (k == sc.max_steps) {
      log.steps.push_back(std::move(row));
      break;
    }

    PlannerInput in;
    in.state = p;
    in.goal = goal;
    in.bounds = bounds;
    in.dt = sc.dt;
    const std::vector<Box> sensed = world.Sensed();
    if (sc.time_varying && !tb.converged()) {
      std::size_t prev = times.size();
      for (std::size_t j = 1;; ++j) {
        const double t = active + static_cast<double>(j) * sc.dt;
        std::size_t idx = 0;
        while (idx + 1 < times.size() && times[idx] < t - kTimeTol) ++idx;
        if (idx == prev && idx + 1 == times.size()) break;
        in.obstacles.push_back(augment_constraints(sensed, margins[idx]));
        prev = idx;
        if (idx + 1 == times.size()) break;
      }
    } else {
      in.obstacles.push_back(augment_constraints(sensed, widest));
    }

    PlannedStep step;
    const auto t_plan = Clock::now();
    try {
      step = planner.Next(in);
    } catch (const Error&) {
      log.steps.push_back(std::move(row));
      if (partial) *partial = log;
      throw;
    }
    row.planner_seconds = Seconds(t_plan);
    if (step.at_goal) {
      log.reached_goal = true;
      log.steps.push_back(std::move(row));
      break;
    }

    const auto t_ctrl = Clock::now();
    const std::vector<double> r_next = relative_state(s, step.next, rel);
    HybridDecision dec =
        hybrid_control(tb, r_next, active, q, sc.hybrid, step.control);
    row.controller_seconds = Seconds(t_ctrl);
    row.mode = dec.mode;
    row.u = std::move(dec.u);

    switch (sc.disturbance.kind) {
      case DisturbanceKind::kZero:
        row.d = dbox.midpoint();
        break;
      case DisturbanceKind::kUniform:
        row.d.resize(dbox.dim());
        for (std::size_t j = 0; j < dbox.dim(); ++j) {
          row.d[j] = std::uniform_real_distribution<double>(dbox.lo(j),
                                                            dbox.hi(j))(rng);
        }
        break;
      case DisturbanceKind::kAdversarial:
        row.d = dbox.Clamp(TrackingDisturbance(
            rel, step.next, adversarial_disturbance(tb, r_next, active)));
        break;
    }

    s = step_tracking(rel.tracking, s, row.u, row.d, sc.dt);
    p = step.next;
    log.steps.push_back(std::move(row));
  }
  return log;
}

SimSummary metrics(const SimLog& log) {
  SimSummary m;
  m.steps = log.steps.size();
  m.reached_goal = log.reached_goal;
  if (log.reached_goal && !log.steps.empty()) {
    m.time_to_goal = log.steps.back().time;
  }
  m.max_error.assign(log.error_dims.size(), 0.0);
  std::optional<ControllerMode> last_mode;
  std::optional<double> engaged;
  std::size_t controlled = 0;
  for (const SimStep& st : log.steps) {
    for (std::size_t k = 0; k < log.error_dims.size(); ++k) {
      m.max_error[k] =
          std::max(m.max_error[k], std::abs(st.r[log.error_dims[k]]));
    }
    double pe = 0.0;
    for (std::size_t d : log.position_error_dims) pe += st.r[d] * st.r[d];
    m.max_position_error = std::max(m.max_position_error, std::sqrt(pe));
    m.teb_violations += st.teb_violation;
    m.collisions += st.collision;
    m.out_of_bounds += st.out_of_bounds;
    m.planner_seconds_max = std::max(m.planner_seconds_max, st.planner_seconds);
    m.controller_seconds_max =
        std::max(m.controller_seconds_max, st.controller_seconds);
    m.planner_seconds_mean += st.planner_seconds;
    m.controller_seconds_mean += st.controller_seconds;
    if (engaged && std::isfinite(st.value)) {
      m.max_switch_excess = std::max(m.max_switch_excess, st.value - *engaged);
    }
    if (st.u.empty()) continue;
    ++controlled;
    if (st.mode == ControllerMode::kOptimal) {
      ++m.optimal_steps;
      if (last_mode != ControllerMode::kOptimal && std::isfinite(st.value)) {
        engaged = st.value;
      }
    }
    if (last_mode && *last_mode != st.mode) ++m.mode_switches;
    last_mode = st.mode;
  }
  if (controlled > 0) {
    m.planner_seconds_mean /= static_cast<double>(controlled);
    m.controller_seconds_mean /= static_cast<double>(controlled);
  }
  return m;
}

const char* ModeName(ControllerMode mode) {
  return mode == ControllerMode::kOptimal ? "optimal" : "performance";
}

void WriteCsv(const SimLog& log, std::ostream& out) {
  std::size_t nu = 0;
  std::size_t nd = 0;
  for (const SimStep& st : log.steps) {
    nu = std::max(nu, st.u.size());
    nd = std::max(nd, st.d.size());
  }
  std::string line = "t";
  for (const auto& n : log.tracking_names) line += ",s_" + n;
  for (const auto& n : log.planning_names) line += ",p_" + n;
  for (const auto& n : log.relative_names) line += ",r_" + n;
  line += ",value,tau,mode";
  for (std::size_t j = 0; j < nu; ++j) line += ",u" + std::to_string(j);
  for (std::size_t j = 0; j < nd; ++j) line += ",d" + std::to_string(j);
  line += ",sensed,teb_violation,collision,out_of_bounds\n";
  out << line;
  for (const SimStep& st : log.steps) {
    line.clear();
    AppendNumber(line, st.time);
    for (const auto* v : {&st.s, &st.p, &st.r}) {
      for (double x : *v) {
        line += ',';
        AppendNumber(line, x);
      }
    }
    line += ',';
    AppendNumber(line, st.value);
    line += ',';
    AppendNumber(line, st.tau);
    line += ',';
    line += st.u.empty() ? "none" : ModeName(st.mode);
    for (std::size_t j = 0; j < nu; ++j) {
      line += ',';
      if (j < st.u.size()) AppendNumber(line, st.u[j]);
    }
    for (std::size_t j = 0; j < nd; ++j) {
      line += ',';
      if (j < st.d.size()) AppendNumber(line, st.d[j]);
    }
    line += ',' + std::to_string(st.sensed);
    line += st.teb_violation ? ",1" : ",0";
    line += st.collision ? ",1" : ",0";
    line += st.out_of_bounds ? ",1\n" : ",0\n";
    out << line;
  }
}

std::string SummaryJson(const SimSummary& m) {
  nlohmann::ordered_json j;
  j["steps"] = m.steps;
  j["reached_goal"] = m.reached_goal;
  j["time_to_goal"] =
      m.time_to_goal ? nlohmann::ordered_json(*m.time_to_goal) : nullptr;
  j["max_error"] = m.max_error;
  j["max_position_error"] = m.max_position_error;
  j["teb_violations"] = m.teb_violations;
  j["collisions"] = m.collisions;
  j["out_of_bounds"] = m.out_of_bounds;
  j["mode_switches"] = m.mode_switches;
  j["optimal_steps"] = m.optimal_steps;
  j["max_switch_excess"] = m.max_switch_excess;
  j["planner_seconds_mean"] = m.planner_seconds_mean;
  j["planner_seconds_max"] = m.planner_seconds_max;
  j["controller_seconds_mean"] = m.controller_seconds_mean;
  j["controller_seconds_max"] = m.controller_seconds_max;
  return j.dump(2);
}

}  // namespace fastrack
