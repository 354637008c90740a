#include "fastrack/world.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fastrack/error.h"

namespace fastrack {
namespace {

constexpr int kArcSegments = 32;

struct Pt2 {
  double x;
  double y;
};

double DistanceSq(const Box& box, std::span<const double> c,
                  std::size_t skip) {
  double s = 0.0;
  for (std::size_t i = 0; i < box.dim(); ++i) {
    if (i == skip) continue;
    const double d = std::max({box.lo(i) - c[i], 0.0, c[i] - box.hi(i)});
    s += d * d;
  }
  return s;
}

// Bounding box of obstacle and ball, or nullopt when they do not meet.
std::optional<Box> BallFootprint(const Box& box, std::span<const double> c,
                                 double radius) {
  if (DistanceSq(box, c, box.dim()) > radius * radius) return std::nullopt;
  std::vector<double> lo(box.dim());
  std::vector<double> hi(box.dim());
  for (std::size_t i = 0; i < box.dim(); ++i) {
    const double reach =
        std::sqrt(std::max(0.0, radius * radius - DistanceSq(box, c, i)));
    lo[i] = std::max(box.lo(i), c[i] - reach);
    hi[i] = std::min(box.hi(i), c[i] + reach);
    if (lo[i] > hi[i]) return std::nullopt;
  }
  return Box(lo, hi);
}

// Clips a polygon against the half-plane sign * (p[axis] - bound) <= 0.
std::vector<Pt2> ClipHalfPlane(const std::vector<Pt2>& poly, int axis,
                               double bound, double sign) {
  auto inside = [&](const Pt2& p) {
    return sign * ((axis == 0 ? p.x : p.y) - bound) <= 0.0;
  };
  auto cross = [&](const Pt2& a, const Pt2& b) {
    const double va = axis == 0 ? a.x : a.y;
    const double vb = axis == 0 ? b.x : b.y;
    const double t = (bound - va) / (vb - va);
    return Pt2{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
  };
  std::vector<Pt2> out;
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const Pt2& a = poly[k];
    const Pt2& b = poly[(k + 1) % poly.size()];
    const bool ia = inside(a);
    const bool ib = inside(b);
    if (ia) out.push_back(a);
    if (ia != ib) out.push_back(cross(a, b));
  }
  return out;
}

// Bounding box of the sector (circumscribed polygon) clipped to the box's
// first two dimensions.
std::optional<std::pair<Pt2, Pt2>> SectorFootprint(const Box& box,
                                                   std::span<const double> c,
                                                   double heading,
                                                   const SensorModel& s) {
  const double step = 2.0 * s.half_angle / kArcSegments;
  const double r = s.radius / std::cos(0.5 * step);
  std::vector<Pt2> poly;
  if (s.half_angle < std::numbers::pi) poly.push_back({c[0], c[1]});
  for (int k = 0; k <= kArcSegments; ++k) {
    const double a = heading - s.half_angle + step * k;
    poly.push_back({c[0] + r * std::cos(a), c[1] + r * std::sin(a)});
  }
  poly = ClipHalfPlane(poly, 0, box.lo(0), -1.0);
  poly = ClipHalfPlane(poly, 0, box.hi(0), 1.0);
  poly = ClipHalfPlane(poly, 1, box.lo(1), -1.0);
  poly = ClipHalfPlane(poly, 1, box.hi(1), 1.0);
  if (poly.empty()) return std::nullopt;
  Pt2 lo = poly[0];
  Pt2 hi = poly[0];
  for (const Pt2& p : poly) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  return std::make_pair(lo, hi);
}

}  // namespace

void SensorModel::Validate() const {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw Error(ErrorCode::kInvalidArgument, "sensor radius must be positive");
  }
  if (kind == SensorKind::kFan &&
      !(half_angle > 0.0 && half_angle <= std::numbers::pi)) {
    throw Error(ErrorCode::kInvalidArgument,
                "fan half-angle must lie in (0, pi]");
  }
}

void Environment::Validate() const {
  sensor.Validate();
  if (bounds.dim() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "world bounds are empty");
  }
  for (const Box& b : obstacles) {
    if (b.dim() != bounds.dim()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "obstacle dimension differs from the world bounds");
    }
  }
  if (goal.dim() != bounds.dim()) {
    throw Error(ErrorCode::kInvalidArgument,
                "goal dimension differs from the world bounds");
  }
  if (sensor.kind == SensorKind::kFan && bounds.dim() < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "fan sensing needs two position dimensions");
  }
}

ConstraintState::ConstraintState(std::vector<Box> obstacles)
    : obstacles_(std::move(obstacles)), fragments_(obstacles_.size()) {}

std::vector<Box> ConstraintState::Sensed() const {
  std::vector<Box> out;
  for (const auto& f : fragments_) {
    if (f) out.push_back(*f);
  }
  return out;
}

std::size_t ConstraintState::sensed_count() const {
  return static_cast<std::size_t>(
      std::count_if(fragments_.begin(), fragments_.end(),
                    [](const auto& f) { return f.has_value(); }));
}

bool ConstraintState::Reveal(std::size_t i, const Box& fragment) {
  if (i >= obstacles_.size() || !obstacles_[i].ContainsBox(fragment, 1e-12)) {
    throw Error(ErrorCode::kInvalidArgument,
                "fragment is not inside its obstacle");
  }
  if (!fragments_[i]) {
    fragments_[i] = fragment;
    return true;
  }
  const Box merged = fragments_[i]->Hull(fragment);
  if (merged == *fragments_[i]) return false;
  fragments_[i] = merged;
  return true;
}

std::vector<std::pair<std::size_t, Box>> SensorFootprints(
    const std::vector<Box>& obstacles, std::span<const double> position,
    std::optional<double> heading, const SensorModel& sensor) {
  std::vector<std::pair<std::size_t, Box>> out;
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const Box& box = obstacles[i];
    if (box.dim() != position.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "obstacle and position dimensions differ");
    }
    auto ball = BallFootprint(box, position, sensor.radius);
    if (!ball) continue;
    if (sensor.kind == SensorKind::kFan) {
      if (!heading || box.dim() < 2) {
        throw Error(ErrorCode::kInvalidArgument,
                    "fan sensing needs a heading and two dimensions");
      }
      const auto sector = SectorFootprint(box, position, *heading, sensor);
      if (!sector) continue;
      std::vector<double> lo = ball->lo();
      std::vector<double> hi = ball->hi();
      lo[0] = std::max(lo[0], sector->first.x);
      lo[1] = std::max(lo[1], sector->first.y);
      hi[0] = std::min(hi[0], sector->second.x);
      hi[1] = std::min(hi[1], sector->second.y);
      if (lo[0] > hi[0] || lo[1] > hi[1]) continue;
      ball = Box(lo, hi);
    }
    out.emplace_back(i, *ball);
  }
  return out;
}

std::vector<Box> sense(ConstraintState& state, std::span<const double> position,
                       std::optional<double> heading,
                       const SensorModel& sensor) {
  std::vector<Box> grown;
  for (const auto& [i, box] :
       SensorFootprints(state.obstacles(), position, heading, sensor)) {
    if (state.Reveal(i, box)) grown.push_back(*state.fragments()[i]);
  }
  return grown;
}

std::vector<Box> augment_constraints(const std::vector<Box>& sensed,
                                     std::span<const double> margins) {
  std::vector<Box> out;
  out.reserve(sensed.size());
  for (const Box& b : sensed) {
    if (b.dim() != margins.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "margin count differs from the obstacle dimension");
    }
    out.push_back(b.Expanded(margins));
  }
  return out;
}

std::vector<std::vector<Box>> augment_over_horizon(
    const std::vector<Box>& sensed,
    const std::vector<std::vector<double>>& margins) {
  std::vector<std::vector<Box>> out;
  out.reserve(margins.size());
  for (const auto& m : margins) out.push_back(augment_constraints(sensed, m));
  return out;
}

double min_sensing_radius(double position_extent, double planner_step) {
  return position_extent + planner_step;
}

Box goal_contract(const Box& goal, std::span<const double> margins) {
  if (goal.dim() != margins.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "margin count differs from the goal dimension");
  }
  for (std::size_t i = 0; i < goal.dim(); ++i) {
    if (margins[i] > 0.0 && margins[i] >= goal.half_width(i)) {
      throw Error(ErrorCode::kGoalTooSmall,
                  "goal is smaller than the tracking error bound");
    }
  }
  return goal.Contracted(margins);
}

bool InsideAny(const std::vector<Box>& boxes, std::span<const double> x) {
  return std::any_of(boxes.begin(), boxes.end(),
                     [&](const Box& b) { return b.Contains(x); });
}

}  // namespace fastrack
