#ifndef FASTRACK_GRID_H_
#define FASTRACK_GRID_H_

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "fastrack/box.h"

namespace fastrack {

// Grids are limited to this many dimensions.
inline constexpr std::size_t kMaxGridDims = 12;

struct GridDim {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t nodes = 3;
  bool periodic = false;

  bool operator==(const GridDim&) const = default;
};

// Uniform rectilinear grid. Periodic dimensions hold nodes lo + k*dx for
// k < nodes with dx = (hi - lo) / nodes; the node at hi is identified with lo.
class Grid {
 public:
  Grid() = default;
  // Throws kInvalidArgument for fewer than 3 nodes, lo >= hi or too many
  // dimensions.
  explicit Grid(std::vector<GridDim> dims);

  std::size_t ndims() const { return dims_.size(); }
  std::size_t num_nodes() const { return num_nodes_; }
  const GridDim& dim(std::size_t i) const { return dims_[i]; }
  const std::vector<GridDim>& dims() const { return dims_; }
  double dx(std::size_t i) const { return dx_[i]; }
  std::size_t stride(std::size_t i) const { return stride_[i]; }
  double coord(std::size_t i, std::size_t k) const {
    return dims_[i].lo + static_cast<double>(k) * dx_[i];
  }

  // Row-major: the last dimension varies fastest.
  void Unflatten(std::size_t flat, std::span<std::size_t> idx) const;
  std::size_t Flatten(std::span<const std::size_t> idx) const;
  std::vector<double> Point(std::size_t flat) const;
  void Point(std::size_t flat, std::span<double> x) const;

  // Index of a neighbor offset by +-1 along `d`, wrapping periodic dims.
  // Non-periodic dims clamp to the boundary.
  std::size_t Neighbor(std::size_t flat, std::size_t k_d, std::size_t d,
                       int step) const;

  // Node lies more than `cells` cells away from every non-periodic face.
  bool Interior(std::span<const std::size_t> idx, std::size_t cells) const;

  Box bounds() const;

  bool operator==(const Grid& other) const { return dims_ == other.dims_; }

 private:
  std::vector<GridDim> dims_;
  std::vector<double> dx_;
  std::vector<std::size_t> stride_;
  std::size_t num_nodes_ = 0;
};

struct GridFunction {
  Grid grid;
  std::vector<double> values;

  GridFunction() = default;
  GridFunction(Grid g, std::vector<double> v);
};

// Samples fn at every node.
template <typename Fn>
GridFunction Sample(const Grid& grid, Fn&& fn) {
  std::vector<double> values(grid.num_nodes());
  std::vector<double> x(grid.ndims());
  for (std::size_t i = 0; i < values.size(); ++i) {
    grid.Point(i, x);
    values[i] = fn(std::span<const double>(x));
  }
  return GridFunction(grid, std::move(values));
}

// Multilinear interpolation. Periodic coordinates are wrapped; a coordinate
// outside a non-periodic dimension (beyond a 1e-9 relative tolerance) raises
// kOutOfDomain with the dimension as detail.
double interpolate(const Grid& grid, std::span<const double> values,
                   std::span<const double> x);
double interpolate(const GridFunction& f, std::span<const double> x);

// True when x is inside the grid on every non-periodic dimension.
bool InDomain(const Grid& grid, std::span<const double> x);

// Derivative along `d` at one node: central in the interior, second-order
// one-sided at non-periodic faces, wrapped on periodic dims.
double NodeDerivative(const Grid& grid, std::span<const double> values,
                      std::size_t flat, std::span<const std::size_t> idx,
                      std::size_t d);

// One component per dimension.
std::vector<GridFunction> gradient(const GridFunction& f);

// Multilinear interpolation of the node gradient at x, written to `out`.
void InterpolateGradient(const Grid& grid, std::span<const double> values,
                         std::span<const double> x, std::span<double> out);

// First-order one-sided differences (D-, D+) along `d`. At non-periodic faces
// the missing outward difference copies the adjacent interior one.
std::pair<GridFunction, GridFunction> upwind_pair(const GridFunction& f,
                                                  std::size_t d);

}  // namespace fastrack

#endif  // FASTRACK_GRID_H_
