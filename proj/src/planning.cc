#include "fastrack/planning.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <unordered_map>

#include "fastrack/error.h"

namespace fastrack {
namespace {

constexpr int kSubsteps = 4;
constexpr double kMatchTol = 1e-9;

bool Near(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > kMatchTol * (1.0 + std::abs(b[i]))) {
      return false;
    }
  }
  return true;
}

double DistanceToBox(std::span<const double> x, const Box& box) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = std::max({box.lo(i) - x[i], 0.0, x[i] - box.hi(i)});
    s += d * d;
  }
  return std::sqrt(s);
}

struct KeyHash {
  std::size_t operator()(const std::vector<std::int64_t>& k) const {
    std::uint64_t h = 1469598103934665603ull;
    for (std::int64_t v : k) {
      h ^= static_cast<std::uint64_t>(v);
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

[[noreturn]] void Stuck(const std::string& why) {
  throw Error(ErrorCode::kPlannerStuck, why);
}

}  // namespace

const std::vector<Box>& PlannerInput::ObstaclesAt(std::size_t step) const {
  static const std::vector<Box> kNone;
  if (obstacles.empty()) return kNone;
  return obstacles[std::min(step, obstacles.size() - 1)];
}

std::vector<double> PlanningPosition(const PlanningModel& model,
                                     std::span<const double> p) {
  std::vector<double> x;
  x.reserve(model.position_dims.size());
  for (std::size_t d : model.position_dims) x.push_back(p[d]);
  return x;
}

std::vector<double> IntegratePlanning(const PlanningModel& model,
                                      std::span<const double> p,
                                      std::span<const double> u_hat,
                                      double dt) {
  std::vector<double> x(p.begin(), p.end());
  if (model.single_integrator) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += u_hat[i] * dt;
    return x;
  }
  const double h = dt / kSubsteps;
  std::vector<double> tmp(x.size());
  for (int s = 0; s < kSubsteps; ++s) {
    const auto k1 = model.Flow(x, u_hat);
    for (std::size_t i = 0; i < x.size(); ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
    const auto k2 = model.Flow(tmp, u_hat);
    for (std::size_t i = 0; i < x.size(); ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
    const auto k3 = model.Flow(tmp, u_hat);
    for (std::size_t i = 0; i < x.size(); ++i) tmp[i] = x[i] + h * k3[i];
    const auto k4 = model.Flow(tmp, u_hat);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
  }
  if (model.heading_dim) x[*model.heading_dim] = WrapAngle(x[*model.heading_dim]);
  return x;
}

bool SegmentHitsBox(std::span<const double> a, std::span<const double> b,
                    const Box& box) {
  double t0 = 0.0;
  double t1 = 1.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = b[i] - a[i];
    if (d == 0.0) {
      if (a[i] < box.lo(i) || a[i] > box.hi(i)) return false;
      continue;
    }
    double lo = (box.lo(i) - a[i]) / d;
    double hi = (box.hi(i) - a[i]) / d;
    if (lo > hi) std::swap(lo, hi);
    t0 = std::max(t0, lo);
    t1 = std::min(t1, hi);
    if (t0 > t1) return false;
  }
  return true;
}

double TraversalTime(std::span<const double> a, std::span<const double> b,
                     std::span<const double> speed) {
  double t = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    t = std::max(t, std::abs(b[i] - a[i]) / speed[i]);
  }
  return t;
}

// ---------------------------------------------------------------- grid ---

GridPlanner::GridPlanner(PlanningModel model, GridPlannerConfig cfg)
    : model_(std::move(model)), cfg_(std::move(cfg)) {
  if (cfg_.primitive_steps == 0 || cfg_.control_levels == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "grid planner needs primitive steps and control levels");
  }
  const Box& box = model_.control;
  std::vector<std::vector<double>> levels(box.dim());
  for (std::size_t j = 0; j < box.dim(); ++j) {
    if (cfg_.control_levels == 1) {
      levels[j] = {box.mid(j)};
      continue;
    }
    for (std::size_t k = 0; k < cfg_.control_levels; ++k) {
      levels[j].push_back(box.lo(j) + (box.hi(j) - box.lo(j)) *
                                          static_cast<double>(k) /
                                          static_cast<double>(cfg_.control_levels - 1));
    }
  }
  std::vector<double> u(box.dim());
  std::vector<std::size_t> pick(box.dim(), 0);
  while (true) {
    for (std::size_t j = 0; j < box.dim(); ++j) u[j] = levels[j][pick[j]];
    controls_.push_back(u);
    std::size_t j = 0;
    while (j < box.dim() && ++pick[j] == levels[j].size()) pick[j++] = 0;
    if (j == box.dim()) break;
  }
}

double GridPlanner::MaxStep(double dt) const {
  double best = 0.0;
  const std::vector<double> zero(model_.state_dim(), 0.0);
  for (const auto& u : controls_) {
    const auto next = IntegratePlanning(model_, zero, u, dt);
    double s = 0.0;
    for (std::size_t d : model_.position_dims) s += next[d] * next[d];
    best = std::max(best, std::sqrt(s));
  }
  return best;
}

bool GridPlanner::PlanValid(const PlannerInput& in) const {
  for (std::size_t j = cursor_ + 1; j < plan_.size(); ++j) {
    const auto x = PlanningPosition(model_, plan_[j]);
    if (!in.bounds.Contains(x)) return false;
    for (const Box& b : in.ObstaclesAt(j - cursor_ - 1)) {
      if (b.Contains(x)) return false;
    }
  }
  return true;
}

bool GridPlanner::Replan(const PlannerInput& in) {
  ++replans_;
  plan_.clear();
  plan_u_.clear();
  cursor_ = 0;
  const std::size_t n = model_.state_dim();
  const std::size_t steps = cfg_.primitive_steps;

  // Per-dimension lattice cell.
  std::vector<double> res = cfg_.resolution;
  res.resize(n, 0.0);
  std::vector<double> reach(n, 0.0);
  for (const auto& u : controls_) {
    std::vector<double> x = in.state;
    for (std::size_t s = 0; s < steps; ++s) x = IntegratePlanning(model_, x, u, in.dt);
    for (std::size_t i = 0; i < n; ++i) {
      double d = x[i] - in.state[i];
      if (model_.heading_dim && *model_.heading_dim == i) d = WrapAngle(d);
      reach[i] = std::max(reach[i], std::abs(d));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (res[i] > 0.0) continue;
    res[i] = reach[i] > 0.0 ? 0.5 * reach[i] : 1.0;
  }

  double speed = 0.0;
  if (model_.velocity_dims.empty()) {
    for (const auto& u : controls_) {
      const auto f = model_.Flow(in.state, u);
      double s = 0.0;
      for (std::size_t d : model_.position_dims) s += f[d] * f[d];
      speed = std::max(speed, std::sqrt(s));
    }
  }
  auto heuristic = [&](std::span<const double> p) {
    if (speed <= 0.0) return 0.0;
    return DistanceToBox(PlanningPosition(model_, p), in.goal) /
           (speed * in.dt);
  };
  auto key = [&](std::span<const double> p) {
    std::vector<std::int64_t> k(n);
    for (std::size_t i = 0; i < n; ++i) {
      double d = p[i] - in.state[i];
      if (model_.heading_dim && *model_.heading_dim == i) d = WrapAngle(d);
      k[i] = static_cast<std::int64_t>(std::llround(d / res[i]));
    }
    return k;
  };

  struct Node {
    std::vector<double> state;
    std::size_t parent;
    std::size_t control;
    // Steps of the primitive that led here (shorter when it ends in goal).
    std::size_t length;
    std::size_t g;
    bool goal;
  };
  std::vector<Node> nodes;
  nodes.push_back({in.state, 0, 0, 0, 0, false});
  using Entry = std::tuple<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  std::unordered_map<std::vector<std::int64_t>, std::size_t, KeyHash> seen;
  seen.emplace(key(in.state), 0);
  open.emplace(heuristic(in.state), 0);
  std::size_t expansions = 0;
  std::optional<std::size_t> found;
  while (!open.empty()) {
    const std::size_t id = std::get<1>(open.top());
    open.pop();
    if (nodes[id].goal) {
      found = id;
      break;
    }
    if (++expansions > cfg_.max_expansions) break;
    for (std::size_t c = 0; c < controls_.size(); ++c) {
      std::vector<double> x = nodes[id].state;
      const std::size_t g0 = nodes[id].g;
      bool ok = true;
      bool goal = false;
      std::size_t len = 0;
      for (std::size_t s = 0; s < steps; ++s) {
        x = IntegratePlanning(model_, x, controls_[c], in.dt);
        ++len;
        const auto pos = PlanningPosition(model_, x);
        if (!in.bounds.Contains(pos)) {
          ok = false;
          break;
        }
        for (const Box& b : in.ObstaclesAt(g0 + s)) {
          if (b.Contains(pos)) {
            ok = false;
            break;
          }
        }
        if (!ok) break;
        if (in.goal.Contains(pos)) {
          goal = true;
          break;
        }
      }
      if (!ok) continue;
      auto k = key(x);
      if (!goal) {
        if (seen.count(k)) continue;
        seen.emplace(std::move(k), nodes.size());
      }
      nodes.push_back({x, id, c, len, g0 + len, goal});
      const double f = static_cast<double>(g0 + len) + (goal ? 0.0 : heuristic(x));
      open.emplace(f, nodes.size() - 1);
    }
  }
  if (!found) return false;

  std::vector<std::size_t> chain;
  for (std::size_t id = *found; id != 0; id = nodes[id].parent) chain.push_back(id);
  std::reverse(chain.begin(), chain.end());
  plan_.push_back(in.state);
  for (std::size_t id : chain) {
    std::vector<double> x = plan_.back();
    for (std::size_t s = 0; s < nodes[id].length; ++s) {
      x = IntegratePlanning(model_, x, controls_[nodes[id].control], in.dt);
      plan_.push_back(x);
      plan_u_.push_back(controls_[nodes[id].control]);
    }
  }
  return true;
}

PlannedStep GridPlanner::Next(const PlannerInput& in) {
  if (in.state.size() != model_.state_dim() || !(in.dt > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "planner input");
  }
  PlannedStep out;
  if (in.goal.Contains(PlanningPosition(model_, in.state))) {
    out.next = in.state;
    out.at_goal = true;
    plan_.clear();
    return out;
  }
  const bool follow = !plan_.empty() && cursor_ + 1 < plan_.size() &&
                      Near(in.state, plan_[cursor_]) && PlanValid(in);
  if (!follow && !Replan(in)) Stuck("grid planner found no path to the goal");
  out.control = plan_u_[cursor_];
  ++cursor_;
  out.next = plan_[cursor_];
  for (std::size_t j = cursor_;
       j < plan_.size() && out.lookahead.size() < cfg_.lookahead_steps; ++j) {
    out.lookahead.push_back(plan_[j]);
  }
  return out;
}

// ----------------------------------------------------------------- rrt ---

RrtPlanner::RrtPlanner(PlanningModel model, RrtConfig cfg, std::uint64_t seed)
    : model_(std::move(model)), cfg_(cfg), rng_(seed) {
  if (!model_.single_integrator) {
    throw Error(ErrorCode::kUnsupportedModel,
                "RRT planning needs a single-integrator planning model");
  }
  if (!(cfg_.step > 0.0) || cfg_.max_iterations == 0) {
    throw Error(ErrorCode::kInvalidArgument, "RRT step and iterations");
  }
  for (std::size_t j = 0; j < model_.control.dim(); ++j) {
    speed_.push_back(std::min(-model_.control.lo(j), model_.control.hi(j)));
    if (!(speed_.back() > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "planning control box must contain zero in its interior");
    }
  }
}

double RrtPlanner::MaxStep(double dt) const {
  double s = 0.0;
  for (double v : speed_) s += v * v;
  return std::sqrt(s) * dt;
}

std::vector<double> RrtPlanner::Along(double t) const {
  if (path_.empty()) return {};
  if (t >= arrival_.back()) return path_.back();
  std::size_t k = 0;
  while (k + 1 < arrival_.size() && arrival_[k + 1] <= t) ++k;
  const double span = arrival_[k + 1] - arrival_[k];
  const double a = span > 0.0 ? (t - arrival_[k]) / span : 1.0;
  std::vector<double> x(path_[k].size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = path_[k][i] + a * (path_[k + 1][i] - path_[k][i]);
  }
  return x;
}

bool RrtPlanner::PathValid(const PlannerInput& in) const {
  const std::vector<Box>& obs = in.ObstaclesAt(in.obstacles.size());
  std::vector<double> from = Along(elapsed_);
  std::size_t k = 0;
  while (k < arrival_.size() && arrival_[k] <= elapsed_) ++k;
  for (; k < path_.size(); ++k) {
    for (const Box& b : obs) {
      if (SegmentHitsBox(from, path_[k], b)) return false;
    }
    from = path_[k];
  }
  return true;
}

bool RrtPlanner::Rebuild(const PlannerInput& in) {
  ++rebuilds_;
  path_.clear();
  arrival_.clear();
  elapsed_ = 0.0;
  const std::vector<Box>& obs = in.ObstaclesAt(in.obstacles.size());
  auto free = [&](std::span<const double> a, std::span<const double> b) {
    for (const Box& box : obs) {
      if (SegmentHitsBox(a, b, box)) return false;
    }
    return true;
  };
  const std::vector<double> root = PlanningPosition(model_, in.state);
  const std::size_t n = root.size();
  std::vector<std::vector<double>> pts = {root};
  std::vector<std::size_t> parent = {0};
  std::vector<std::uniform_real_distribution<double>> sample;
  for (std::size_t i = 0; i < n; ++i) {
    sample.emplace_back(in.bounds.lo(i), in.bounds.hi(i));
  }
  std::optional<std::size_t> last;
  std::vector<double> goal_point;
  std::vector<double> q(n);
  for (std::size_t it = 0; it < cfg_.max_iterations && !last; ++it) {
    for (std::size_t i = 0; i < n; ++i) q[i] = sample[i](rng_);
    std::size_t near = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < pts.size(); ++k) {
      double d = 0.0;
      for (std::size_t i = 0; i < n; ++i) d += (pts[k][i] - q[i]) * (pts[k][i] - q[i]);
      if (d < best) {
        best = d;
        near = k;
      }
    }
    best = std::sqrt(best);
    std::vector<double> x = q;
    if (best > cfg_.step) {
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = pts[near][i] + (q[i] - pts[near][i]) * cfg_.step / best;
      }
    }
    if (!free(pts[near], x)) continue;
    pts.push_back(x);
    parent.push_back(near);
    const std::vector<double> g = in.goal.Clamp(x);
    double dg = 0.0;
    for (std::size_t i = 0; i < n; ++i) dg += (g[i] - x[i]) * (g[i] - x[i]);
    if (std::sqrt(dg) <= cfg_.step && free(x, g)) {
      last = pts.size() - 1;
      goal_point = g;
    }
  }
  if (!last) return false;
  std::vector<std::vector<double>> rev = {goal_point};
  for (std::size_t k = *last;; k = parent[k]) {
    rev.push_back(pts[k]);
    if (k == 0) break;
  }
  path_.assign(rev.rbegin(), rev.rend());
  arrival_.push_back(0.0);
  for (std::size_t k = 1; k < path_.size(); ++k) {
    arrival_.push_back(arrival_.back() +
                       TraversalTime(path_[k - 1], path_[k], speed_));
  }
  return true;
}

PlannedStep RrtPlanner::Next(const PlannerInput& in) {
  if (in.state.size() != model_.state_dim() || !(in.dt > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "planner input");
  }
  PlannedStep out;
  if (in.goal.Contains(PlanningPosition(model_, in.state))) {
    out.next = in.state;
    out.at_goal = true;
    path_.clear();
    return out;
  }
  const bool follow = !path_.empty() && Near(in.state, Along(elapsed_)) &&
                      PathValid(in);
  if (!follow && !Rebuild(in)) Stuck("RRT found no path to the goal");
  for (std::size_t k = 1; k <= cfg_.lookahead_steps; ++k) {
    out.lookahead.push_back(Along(elapsed_ + static_cast<double>(k) * in.dt));
    if (elapsed_ + static_cast<double>(k) * in.dt >= arrival_.back()) break;
  }
  const std::vector<double> here = Along(elapsed_);
  elapsed_ += in.dt;
  out.next = out.lookahead.front();
  for (std::size_t i = 0; i < here.size(); ++i) {
    out.control.push_back(
        std::clamp((out.next[i] - here[i]) / in.dt, -speed_[i], speed_[i]));
  }
  return out;
}

}  // namespace fastrack
