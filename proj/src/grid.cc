#include "fastrack/grid.h"

#include <array>
#include <cmath>
#include <string>

#include "fastrack/error.h"

namespace fastrack {

Grid::Grid(std::vector<GridDim> dims) : dims_(std::move(dims)) {
  if (dims_.empty() || dims_.size() > kMaxGridDims) {
    throw Error(ErrorCode::kInvalidArgument, "grid must have 1 to " +
                                                 std::to_string(kMaxGridDims) +
                                                 " dimensions");
  }
  const std::size_t n = dims_.size();
  dx_.resize(n);
  stride_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const GridDim& g = dims_[i];
    if (g.nodes < 3) {
      throw Error(ErrorCode::kInvalidArgument,
                  "grid dimension " + std::to_string(i) + " needs >= 3 nodes");
    }
    if (!(g.lo < g.hi) || !std::isfinite(g.lo) || !std::isfinite(g.hi)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "grid dimension " + std::to_string(i) + " needs lo < hi");
    }
    const double cells =
        static_cast<double>(g.periodic ? g.nodes : g.nodes - 1);
    dx_[i] = (g.hi - g.lo) / cells;
  }
  std::size_t s = 1;
  for (std::size_t i = n; i-- > 0;) {
    stride_[i] = s;
    s *= dims_[i].nodes;
  }
  num_nodes_ = s;
}

void Grid::Unflatten(std::size_t flat, std::span<std::size_t> idx) const {
  for (std::size_t i = 0; i < ndims(); ++i) {
    idx[i] = flat / stride_[i];
    flat -= idx[i] * stride_[i];
  }
}

std::size_t Grid::Flatten(std::span<const std::size_t> idx) const {
  std::size_t flat = 0;
  for (std::size_t i = 0; i < ndims(); ++i) flat += idx[i] * stride_[i];
  return flat;
}

std::vector<double> Grid::Point(std::size_t flat) const {
  std::vector<double> x(ndims());
  Point(flat, x);
  return x;
}

void Grid::Point(std::size_t flat, std::span<double> x) const {
  for (std::size_t i = 0; i < ndims(); ++i) {
    const std::size_t k = flat / stride_[i];
    flat -= k * stride_[i];
    x[i] = coord(i, k);
  }
}

std::size_t Grid::Neighbor(std::size_t flat, std::size_t k_d, std::size_t d,
                           int step) const {
  const std::size_t n = dims_[d].nodes;
  if (step > 0) {
    if (k_d + 1 < n) return flat + stride_[d];
    return dims_[d].periodic ? flat - k_d * stride_[d] : flat;
  }
  if (k_d > 0) return flat - stride_[d];
  return dims_[d].periodic ? flat + (n - 1) * stride_[d] : flat;
}

bool Grid::Interior(std::span<const std::size_t> idx, std::size_t cells) const {
  for (std::size_t i = 0; i < ndims(); ++i) {
    if (dims_[i].periodic) continue;
    if (idx[i] < cells || idx[i] + cells >= dims_[i].nodes) return false;
  }
  return true;
}

Box Grid::bounds() const {
  std::vector<double> lo(ndims());
  std::vector<double> hi(ndims());
  for (std::size_t i = 0; i < ndims(); ++i) {
    lo[i] = dims_[i].lo;
    hi[i] = dims_[i].hi;
  }
  return Box(std::move(lo), std::move(hi));
}

GridFunction::GridFunction(Grid g, std::vector<double> v)
    : grid(std::move(g)), values(std::move(v)) {
  if (values.size() != grid.num_nodes()) {
    throw Error(ErrorCode::kInvalidArgument,
                "grid function value count does not match the grid");
  }
}

namespace {

struct Cell {
  std::array<std::size_t, kMaxGridDims> k0;
  std::array<std::size_t, kMaxGridDims> k1;
  std::array<double, kMaxGridDims> t;
};

// Locates the interpolation cell of x. Returns false (with the offending
// dimension) when x is outside a non-periodic dimension.
bool Locate(const Grid& grid, std::span<const double> x, Cell& cell,
            std::size_t& bad_dim) {
  for (std::size_t i = 0; i < grid.ndims(); ++i) {
    const GridDim& g = grid.dim(i);
    const std::size_t n = g.nodes;
    const double dx = grid.dx(i);
    if (!std::isfinite(x[i])) {
      bad_dim = i;
      return false;
    }
    if (g.periodic) {
      const double period = g.hi - g.lo;
      double y = std::fmod(x[i] - g.lo, period);
      if (y < 0) y += period;
      double s = y / dx;
      auto k = static_cast<std::size_t>(std::floor(s));
      if (k >= n) {
        k = n - 1;
        s = static_cast<double>(k);
      }
      cell.k0[i] = k;
      cell.k1[i] = (k + 1) % n;
      cell.t[i] = s - static_cast<double>(k);
    } else {
      const double tol = 1e-9 * (g.hi - g.lo);
      if (x[i] < g.lo - tol || x[i] > g.hi + tol) {
        bad_dim = i;
        return false;
      }
      const double s = std::clamp((x[i] - g.lo) / dx, 0.0,
                                  static_cast<double>(n - 1));
      auto k = static_cast<std::size_t>(std::floor(s));
      if (k >= n - 1) k = n - 2;
      cell.k0[i] = k;
      cell.k1[i] = k + 1;
      cell.t[i] = s - static_cast<double>(k);
    }
  }
  return true;
}

void LocateOrThrow(const Grid& grid, std::span<const double> x, Cell& cell) {
  if (x.size() != grid.ndims()) {
    throw Error(ErrorCode::kInvalidArgument, "query point dimension");
  }
  std::size_t bad = 0;
  if (!Locate(grid, x, cell, bad)) {
    throw Error(ErrorCode::kOutOfDomain,
                "point outside grid in dimension " + std::to_string(bad), bad);
  }
}

// Calls fn(flat, idx, weight) for every cell corner with non-zero weight.
template <typename Fn>
void ForEachCorner(const Grid& grid, const Cell& cell, Fn&& fn) {
  const std::size_t d = grid.ndims();
  std::array<std::size_t, kMaxGridDims> idx{};
  const std::size_t corners = std::size_t{1} << d;
  for (std::size_t c = 0; c < corners; ++c) {
    double w = 1.0;
    std::size_t flat = 0;
    for (std::size_t i = 0; i < d; ++i) {
      const bool upper = (c >> i) & 1u;
      w *= upper ? cell.t[i] : 1.0 - cell.t[i];
      idx[i] = upper ? cell.k1[i] : cell.k0[i];
      flat += idx[i] * grid.stride(i);
    }
    if (w == 0.0) continue;
    fn(flat, std::span<const std::size_t>(idx.data(), d), w);
  }
}

}  // namespace

bool InDomain(const Grid& grid, std::span<const double> x) {
  Cell cell;
  std::size_t bad = 0;
  return x.size() == grid.ndims() && Locate(grid, x, cell, bad);
}

double interpolate(const Grid& grid, std::span<const double> values,
                   std::span<const double> x) {
  Cell cell;
  LocateOrThrow(grid, x, cell);
  double acc = 0.0;
  ForEachCorner(grid, cell,
                [&](std::size_t flat, std::span<const std::size_t>, double w) {
                  acc += w * values[flat];
                });
  return acc;
}

double interpolate(const GridFunction& f, std::span<const double> x) {
  return interpolate(f.grid, f.values, x);
}

double NodeDerivative(const Grid& grid, std::span<const double> values,
                      std::size_t flat, std::span<const std::size_t> idx,
                      std::size_t d) {
  const GridDim& g = grid.dim(d);
  const double h = grid.dx(d);
  const std::size_t k = idx[d];
  const std::size_t s = grid.stride(d);
  if (g.periodic) {
    const std::size_t up = grid.Neighbor(flat, k, d, +1);
    const std::size_t down = grid.Neighbor(flat, k, d, -1);
    return (values[up] - values[down]) / (2.0 * h);
  }
  if (k == 0) {
    return (-3.0 * values[flat] + 4.0 * values[flat + s] -
            values[flat + 2 * s]) /
           (2.0 * h);
  }
  if (k + 1 == g.nodes) {
    return (3.0 * values[flat] - 4.0 * values[flat - s] +
            values[flat - 2 * s]) /
           (2.0 * h);
  }
  return (values[flat + s] - values[flat - s]) / (2.0 * h);
}

std::vector<GridFunction> gradient(const GridFunction& f) {
  const Grid& grid = f.grid;
  std::vector<GridFunction> out;
  for (std::size_t d = 0; d < grid.ndims(); ++d) {
    out.emplace_back(grid, std::vector<double>(grid.num_nodes()));
  }
  std::vector<std::size_t> idx(grid.ndims());
  for (std::size_t i = 0; i < grid.num_nodes(); ++i) {
    grid.Unflatten(i, idx);
    for (std::size_t d = 0; d < grid.ndims(); ++d) {
      out[d].values[i] = NodeDerivative(grid, f.values, i, idx, d);
    }
  }
  return out;
}

void InterpolateGradient(const Grid& grid, std::span<const double> values,
                         std::span<const double> x, std::span<double> out) {
  Cell cell;
  LocateOrThrow(grid, x, cell);
  for (std::size_t d = 0; d < grid.ndims(); ++d) out[d] = 0.0;
  ForEachCorner(grid, cell,
                [&](std::size_t flat, std::span<const std::size_t> idx,
                    double w) {
                  for (std::size_t d = 0; d < grid.ndims(); ++d) {
                    out[d] += w * NodeDerivative(grid, values, flat, idx, d);
                  }
                });
}

std::pair<GridFunction, GridFunction> upwind_pair(const GridFunction& f,
                                                  std::size_t d) {
  const Grid& grid = f.grid;
  if (d >= grid.ndims()) {
    throw Error(ErrorCode::kInvalidArgument, "upwind_pair dimension");
  }
  std::vector<double> minus(grid.num_nodes());
  std::vector<double> plus(grid.num_nodes());
  const double h = grid.dx(d);
  const std::size_t n = grid.dim(d).nodes;
  const bool periodic = grid.dim(d).periodic;
  const std::size_t s = grid.stride(d);
  for (std::size_t i = 0; i < grid.num_nodes(); ++i) {
    const std::size_t k = (i / s) % n;
    const double v = f.values[i];
    if (periodic || (k > 0 && k + 1 < n)) {
      minus[i] = (v - f.values[grid.Neighbor(i, k, d, -1)]) / h;
      plus[i] = (f.values[grid.Neighbor(i, k, d, +1)] - v) / h;
    } else if (k == 0) {
      plus[i] = (f.values[i + s] - v) / h;
      minus[i] = plus[i];
    } else {
      minus[i] = (v - f.values[i - s]) / h;
      plus[i] = minus[i];
    }
  }
  return {GridFunction(grid, std::move(minus)),
          GridFunction(grid, std::move(plus))};
}

}  // namespace fastrack
