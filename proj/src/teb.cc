#include "fastrack/teb.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "fastrack/error.h"

namespace fastrack {
namespace {

constexpr double kTimeTol = 1e-9;

std::vector<std::size_t> Iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

Subsystem WholeSystem(const RelativeSystem& rel) {
  Subsystem s;
  s.name = rel.name;
  s.system = rel;
  s.state_dims = Iota(rel.dim());
  s.control_dims = Iota(rel.tracking.control.dim());
  s.planning_control_dims = Iota(rel.planning.control.dim());
  s.disturbance_dims = Iota(rel.tracking.disturbance.dim());
  return s;
}

std::optional<std::size_t> MatchedRow(const RelativeSystem& rel,
                                      std::size_t col) {
  for (std::size_t i = 0; i < rel.q.size(); ++i) {
    if (rel.q[i][col]) return i;
  }
  return std::nullopt;
}

bool IsPositionRow(const RelativeSystem& rel, std::size_t row) {
  const auto col = rel.MatchedPlanningDim(row);
  if (!col) return false;
  const auto& pos = rel.planning.position_dims;
  return std::find(pos.begin(), pos.end(), *col) != pos.end();
}

struct PartOptimum {
  std::vector<double> u;
  std::vector<double> u_hat;
  std::vector<double> d;
};

PartOptimum OptimizePart(const TrackingBound& tb, std::size_t i,
                         std::span<const double> r, double tau) {
  const ValueFunction& vf = tb.part(i);
  const RelativeSystem& sys = tb.subsystem(i).system;
  const std::vector<double> x = tb.PartState(i, r);
  if (!InDomain(vf.grid, x)) {
    for (std::size_t d = 0; d < x.size(); ++d) {
      const GridDim& gd = vf.grid.dim(d);
      const double tol = 1e-9 * (gd.hi - gd.lo);
      if (!gd.periodic && (x[d] < gd.lo - tol || x[d] > gd.hi + tol)) {
        throw Error(ErrorCode::kOutOfDomain, "relative state outside the grid",
                    tb.subsystem(i).state_dims[d]);
      }
    }
  }
  std::vector<double> grad(x.size());
  InterpolateGradient(vf.grid, vf.values[tb.CeilIndex(i, tau)], x, grad);
  AffineTerms terms;
  terms.Resize(sys.dim(), sys.tracking.control.dim(),
               sys.planning.control.dim(), sys.tracking.disturbance.dim());
  terms.Reset();
  sys.affine(x, terms);
  PartOptimum out{std::vector<double>(terms.n_control),
                  std::vector<double>(terms.n_planning),
                  std::vector<double>(terms.n_disturbance)};
  HamiltonianFromTerms(terms, grad, sys.tracking.control, sys.planning.control,
                       sys.tracking.disturbance, out.u, out.u_hat, out.d);
  return out;
}

}  // namespace

double TebExtents::HalfWidth(std::size_t rel_dim) const {
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (dims[k] == rel_dim) return half_width[k];
  }
  return 0.0;
}

TrackingBound::TrackingBound(RelativeSystem rel, ValueFunction vf)
    : rel_(std::move(rel)) {
  subsystems_.push_back(WholeSystem(rel_));
  parts_.push_back(std::move(vf));
  Check();
}

TrackingBound::TrackingBound(RelativeSystem rel,
                             std::vector<Subsystem> subsystems,
                             std::vector<ValueFunction> parts)
    : rel_(std::move(rel)),
      subsystems_(std::move(subsystems)),
      parts_(std::move(parts)) {
  Check();
}

void TrackingBound::Check() {
  if (parts_.empty() || parts_.size() != subsystems_.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "one value function per subsystem is required");
  }
  std::vector<bool> used(rel_.dim(), false);
  const std::vector<double>* times = nullptr;
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    const Subsystem& s = subsystems_[i];
    const ValueFunction& vf = parts_[i];
    if (vf.grid.ndims() != s.system.dim() ||
        s.state_dims.size() != s.system.dim() || vf.values.empty() ||
        vf.values.size() != vf.times.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "value function does not match subsystem '" + s.name + "'");
    }
    for (std::size_t d : s.state_dims) {
      if (d >= rel_.dim() || used[d]) {
        throw Error(ErrorCode::kInvalidDecomposition,
                    "subsystem state dimensions overlap or exceed the system");
      }
      used[d] = true;
    }
    if (vf.converged) continue;
    if (times && *times != vf.times) {
      throw Error(ErrorCode::kInvalidArgument,
                  "non-converged parts must share snapshot times");
    }
    times = &vf.times;
  }
  if (times) times_ = *times;
}

std::vector<double> TrackingBound::TebTimes() const {
  if (converged()) return {0.0};
  std::vector<double> taus;
  const double t = horizon();
  for (auto it = times_.rbegin(); it != times_.rend(); ++it) {
    taus.push_back(t - *it);
  }
  return taus;
}

double TrackingBound::min_value() const {
  double v = -std::numeric_limits<double>::infinity();
  for (const auto& p : parts_) v = std::max(v, p.min_value);
  return v;
}

double TrackingBound::default_epsilon() const {
  double e = 0.0;
  for (const auto& p : parts_) e = std::max(e, p.epsilon);
  return e;
}

TebQuery TrackingBound::Query(std::optional<double> epsilon) const {
  const double eps = epsilon.value_or(default_epsilon());
  if (!(eps >= 0.0) || !std::isfinite(eps)) {
    throw Error(ErrorCode::kInvalidArgument, "epsilon must be finite and >= 0");
  }
  return {eps, min_value() + eps};
}

std::size_t TrackingBound::CeilIndex(std::size_t i, double tau) const {
  const ValueFunction& vf = parts_[i];
  if (vf.converged) return vf.values.size() - 1;
  const double h = horizon() - tau;
  const double tol = kTimeTol * std::max(1.0, horizon());
  for (std::size_t k = 0; k < vf.times.size(); ++k) {
    if (vf.times[k] >= h - tol) return k;
  }
  return vf.times.size() - 1;
}

std::size_t TrackingBound::FloorIndex(std::size_t i, double tau) const {
  const ValueFunction& vf = parts_[i];
  if (vf.converged) return vf.values.size() - 1;
  const double h = horizon() - tau;
  const double tol = kTimeTol * std::max(1.0, horizon());
  std::size_t k = 0;
  for (std::size_t j = 0; j < vf.times.size(); ++j) {
    if (vf.times[j] <= h + tol) k = j;
  }
  return k;
}

std::vector<double> TrackingBound::PartState(std::size_t i,
                                             std::span<const double> r) const {
  if (r.size() != rel_.dim()) {
    throw Error(ErrorCode::kInvalidArgument, "relative state dimension");
  }
  const auto& dims = subsystems_[i].state_dims;
  std::vector<double> x(dims.size());
  for (std::size_t k = 0; k < dims.size(); ++k) x[k] = r[dims[k]];
  return x;
}

double TrackingBound::Value(std::span<const double> r, double tau) const {
  double v = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    const ValueFunction& vf = parts_[i];
    const std::vector<double> x = PartState(i, r);
    try {
      v = std::max(v, interpolate(vf.grid, vf.values[CeilIndex(i, tau)], x));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kOutOfDomain || !e.detail()) throw;
      throw Error(ErrorCode::kOutOfDomain, e.what(),
                  subsystems_[i].state_dims[*e.detail()]);
    }
  }
  return v;
}

double min_value(const ValueFunction& vf) {
  return TrustedMin(vf.grid, vf.values.back());
}

double min_value(const TrackingBound& tb) {
  double v = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < tb.num_parts(); ++i) {
    v = std::max(v, min_value(tb.part(i)));
  }
  return v;
}

bool in_teb(const TrackingBound& tb, std::span<const double> r, double tau,
            const TebQuery& q) {
  return tb.Value(r, tau) <= q.level;
}

std::optional<double> smallest_tau(const TrackingBound& tb,
                                   std::span<const double> r,
                                   const TebQuery& q) {
  for (std::size_t i = 0; i < tb.num_parts(); ++i) {
    if (!InDomain(tb.part(i).grid, tb.PartState(i, r))) return std::nullopt;
  }
  for (double tau : tb.TebTimes()) {
    if (tb.Value(r, tau) <= q.level) return tau;
  }
  return std::nullopt;
}

TebExtents teb_extents(const TrackingBound& tb, double tau,
                       const TebQuery& q) {
  const RelativeSystem& rel = tb.system();
  TebExtents ext;
  ext.tau = tau;
  ext.dims = rel.error_dims;
  ext.half_width.assign(ext.dims.size(), 0.0);
  double radius_sq = 0.0;
  for (std::size_t i = 0; i < tb.num_parts(); ++i) {
    const ValueFunction& vf = tb.part(i);
    const Grid& grid = vf.grid;
    const auto& state_dims = tb.subsystem(i).state_dims;
    const std::vector<double>& values = vf.values[tb.FloorIndex(i, tau)];
    // Local dimension -> slot in ext.dims, or -1 for auxiliary dimensions.
    std::vector<int> slot(state_dims.size(), -1);
    std::vector<bool> position(state_dims.size(), false);
    for (std::size_t d = 0; d < state_dims.size(); ++d) {
      for (std::size_t k = 0; k < ext.dims.size(); ++k) {
        if (ext.dims[k] == state_dims[d]) slot[d] = static_cast<int>(k);
      }
      position[d] = IsPositionRow(rel, state_dims[d]);
    }
    std::vector<std::size_t> idx(grid.ndims());
    std::vector<double> local(state_dims.size(), 0.0);
    double part_radius_sq = 0.0;
    bool any = false;
    for (std::size_t n = 0; n < grid.num_nodes(); ++n) {
      if (!(values[n] <= q.level)) continue;
      any = true;
      grid.Unflatten(n, idx);
      double rsq = 0.0;
      for (std::size_t d = 0; d < idx.size(); ++d) {
        const double x = grid.coord(d, idx[d]);
        if (slot[d] >= 0) {
          double& w = ext.half_width[static_cast<std::size_t>(slot[d])];
          w = std::max(w, std::abs(x));
        }
        if (position[d]) rsq += x * x;
      }
      part_radius_sq = std::max(part_radius_sq, rsq);
      if (!grid.Interior(idx, kTrustedCells)) ext.touches_boundary = true;
    }
    if (!any) {
      throw Error(ErrorCode::kDegenerate,
                  "empty sublevel set in part '" + tb.subsystem(i).name +
                      "'; raise epsilon");
    }
    radius_sq += part_radius_sq;
  }
  ext.position_radius = std::sqrt(radius_sq);
  return ext;
}

std::vector<TebExtents> ExtentTable(const TrackingBound& tb,
                                    const TebQuery& q) {
  std::vector<TebExtents> table;
  for (double tau : tb.TebTimes()) table.push_back(teb_extents(tb, tau, q));
  return table;
}

std::vector<double> optimal_tracking_control(const TrackingBound& tb,
                                             std::span<const double> r,
                                             double tau) {
  const RelativeSystem& rel = tb.system();
  std::vector<double> u = rel.tracking.control.midpoint();
  for (std::size_t i = 0; i < tb.num_parts(); ++i) {
    const PartOptimum opt = OptimizePart(tb, i, r, tau);
    const auto& map = tb.subsystem(i).control_dims;
    for (std::size_t k = 0; k < map.size(); ++k) u[map[k]] = opt.u[k];
  }
  return u;
}

WorstCase worst_case_inputs(const TrackingBound& tb, std::span<const double> r,
                            double tau) {
  const RelativeSystem& rel = tb.system();
  WorstCase wc{rel.planning.control.midpoint(),
               rel.tracking.disturbance.midpoint()};
  for (std::size_t i = 0; i < tb.num_parts(); ++i) {
    const PartOptimum opt = OptimizePart(tb, i, r, tau);
    const Subsystem& s = tb.subsystem(i);
    for (std::size_t k = 0; k < s.planning_control_dims.size(); ++k) {
      wc.u_hat[s.planning_control_dims[k]] = opt.u_hat[k];
    }
    for (std::size_t k = 0; k < s.disturbance_dims.size(); ++k) {
      wc.d[s.disturbance_dims[k]] = opt.d[k];
    }
  }
  return wc;
}

namespace {

std::vector<double> Margins(const RelativeSystem& rel, const TebExtents& ext,
                            const std::vector<std::size_t>& cols) {
  std::vector<double> m;
  for (std::size_t col : cols) {
    const auto row = MatchedRow(rel, col);
    if (!row) {
      m.push_back(0.0);
      continue;
    }
    const bool rotated = rel.transform == Transform::kPlanarRotation &&
                         (rel.rotated_dims[0] == *row ||
                          rel.rotated_dims[1] == *row);
    m.push_back(rotated ? ext.position_radius : ext.HalfWidth(*row));
  }
  return m;
}

}  // namespace

std::vector<double> PositionMargins(const RelativeSystem& rel,
                                    const TebExtents& ext) {
  return Margins(rel, ext, rel.planning.position_dims);
}

std::vector<double> VelocityMargins(const RelativeSystem& rel,
                                    const TebExtents& ext) {
  return Margins(rel, ext, rel.planning.velocity_dims);
}

}  // namespace fastrack
