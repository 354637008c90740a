#ifndef FASTRACK_HJSOLVER_H_
#define FASTRACK_HJSOLVER_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fastrack/catalog.h"
#include "fastrack/grid.h"
#include "fastrack/relsys.h"

namespace fastrack {

enum class Dissipation {
  // alpha_i from dissipation_bounds, constant over the grid.
  kGlobal,
  // alpha_i per node, bounding |g_i| only over the inputs that can be optimal
  // for some costate between the one-sided differences.
  kLocalLocal,
};

struct SolverConfig {
  double horizon = 1.0;
  double cfl = 0.5;
  // Stop when max |V_new - V| / dt over trusted nodes drops below this.
  double tolerance = 1e-3;
  // Evenly spaced stored snapshots including tau = 0 and tau = horizon.
  std::size_t snapshots = 11;
  std::size_t max_steps = 1000000;
  bool stop_on_convergence = true;
  // Keeps every step pointwise non-decreasing in the horizon.
  bool monotone = true;
  Dissipation dissipation = Dissipation::kLocalLocal;
  // 1: first-order upwind differences with forward Euler. 2: second-order
  // ENO differences with Heun's method.
  std::size_t order = 1;

  // Throws kInvalidArgument.
  void Validate() const;
};

// V(r, tau) for tau = times[k]. A converged solve keeps one snapshot, taken
// at the convergence time.
struct ValueFunction {
  Grid grid;
  std::vector<double> times;
  std::vector<std::vector<double>> values;
  bool converged = false;
  // Minimum of the last snapshot over trusted nodes.
  double min_value = 0.0;
  // Sublevel slack; the TEB level is min_value + epsilon.
  double epsilon = 0.0;
  std::string system_id;
  std::string error_id;
  std::size_t steps = 0;

  double horizon() const { return times.back(); }
  GridFunction snapshot(std::size_t k) const { return {grid, values[k]}; }
};

// Nodes more than this many cells away from every non-periodic face.
inline constexpr std::size_t kTrustedCells = 2;

struct HamiltonianResult {
  double value = 0.0;
  std::vector<double> u;
  std::vector<double> u_hat;
  std::vector<double> d;
};

// min over u, max over (u_hat, d) of q . g(r, u, u_hat, d) with box
// endpoints; zero coefficients resolve to the interval midpoint.
HamiltonianResult hamiltonian_affine(const RelativeSystem& rel,
                                     std::span<const double> r,
                                     std::span<const double> q);

// Same optimization given precomputed affine terms. Optimizers are written
// to the output spans when they are non-empty.
double HamiltonianFromTerms(const AffineTerms& terms, std::span<const double> q,
                            const Box& control, const Box& planning_control,
                            const Box& disturbance, std::span<double> u = {},
                            std::span<double> u_hat = {},
                            std::span<double> d = {});

// Planning control and disturbance maximizing q . g given a fixed u.
void WorstCaseFromTerms(const AffineTerms& terms, std::span<const double> q,
                        const Box& planning_control, const Box& disturbance,
                        std::span<double> u_hat, std::span<double> d);

// alpha_i = max over nodes and box corners of |g_i|.
std::vector<double> dissipation_bounds(const RelativeSystem& rel,
                                       const Grid& grid);

// Lax-Friedrichs solution of the variational inequality
//   max(l - V, dV/dtau - H(r, grad V)) = 0,  V(r, 0) = l(r).
// NaN or Inf raises kNumericalFailure with the step index as detail.
ValueFunction solve_hjvi(const RelativeSystem& rel, const Grid& grid,
                         const SolverConfig& cfg);

// Minimum over trusted nodes; kDegenerate when no node is trusted.
double TrustedMin(const Grid& grid, std::span<const double> values);

// Largest V - min over the nodes within kTrustedCells cells of the trusted
// argmin.
double DefaultEpsilon(const Grid& grid, std::span<const double> values);

// Grid from a system's default domain and node counts.
Grid DefaultGrid(const RelativeSystem& rel);

struct DecomposedSolution {
  std::vector<ValueFunction> parts;
  // max over parts of their minimum values.
  double min_value = 0.0;
};

// Solves every subsystem independently. Subsystems with identical grids,
// boxes, error functions and dynamics are solved once. Overlapping state
// indices raise kInvalidDecomposition.
DecomposedSolution solve_decomposed(const std::vector<Subsystem>& subsystems,
                                    const std::vector<Grid>& grids,
                                    const SolverConfig& cfg);

}  // namespace fastrack

#endif  // FASTRACK_HJSOLVER_H_
