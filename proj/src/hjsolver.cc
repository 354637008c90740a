#include "fastrack/hjsolver.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <set>

#include "fastrack/error.h"
#include "fastrack/parallel.h"

namespace fastrack {

void SolverConfig::Validate() const {
  if (!(horizon > 0) || !std::isfinite(horizon)) {
    throw Error(ErrorCode::kInvalidArgument, "solver horizon must be > 0");
  }
  if (!(cfl > 0 && cfl <= 1)) {
    throw Error(ErrorCode::kInvalidArgument, "CFL factor must be in (0, 1]");
  }
  if (!(tolerance > 0)) {
    throw Error(ErrorCode::kInvalidArgument, "tolerance must be > 0");
  }
  if (snapshots < 2) {
    throw Error(ErrorCode::kInvalidArgument, "need at least 2 snapshots");
  }
  if (order != 1 && order != 2) {
    throw Error(ErrorCode::kInvalidArgument, "scheme order must be 1 or 2");
  }
  if (max_steps == 0) {
    throw Error(ErrorCode::kInvalidArgument, "max_steps must be > 0");
  }
}

namespace {

// c . v minimized (sign = -1) or maximized (sign = +1) over a box.
inline double BoxExtreme(double c, std::size_t j, const Box& box, double sign,
                         double* arg) {
  const double mid = box.mid(j);
  const double hw = box.half_width(j);
  if (arg) {
    if (c == 0.0) {
      *arg = mid;
    } else {
      *arg = (c * sign > 0) ? box.hi(j) : box.lo(j);
    }
  }
  return c * mid + sign * std::abs(c) * hw;
}

inline double Coefficient(const std::vector<double>& m, std::size_t cols,
                          std::size_t j, std::span<const double> q) {
  double c = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) c += q[i] * m[i * cols + j];
  return c;
}

void RequireAffine(const RelativeSystem& rel) {
  if (!rel.affine) {
    throw Error(ErrorCode::kUnsupportedModel,
                rel.name + " has no control-affine form");
  }
}

AffineTerms MakeTerms(const RelativeSystem& rel) {
  AffineTerms t;
  t.Resize(rel.dim(), rel.tracking.control.dim(), rel.planning.control.dim(),
           rel.tracking.disturbance.dim());
  return t;
}

}  // namespace

double HamiltonianFromTerms(const AffineTerms& terms, std::span<const double> q,
                            const Box& control, const Box& planning_control,
                            const Box& disturbance, std::span<double> u,
                            std::span<double> u_hat, std::span<double> d) {
  double h = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) h += q[i] * terms.drift[i];
  for (std::size_t j = 0; j < terms.n_control; ++j) {
    const double c = Coefficient(terms.control, terms.n_control, j, q);
    h += BoxExtreme(c, j, control, -1.0, u.empty() ? nullptr : &u[j]);
  }
  for (std::size_t j = 0; j < terms.n_planning; ++j) {
    const double c = Coefficient(terms.planning, terms.n_planning, j, q);
    h += BoxExtreme(c, j, planning_control, +1.0,
                    u_hat.empty() ? nullptr : &u_hat[j]);
  }
  for (std::size_t j = 0; j < terms.n_disturbance; ++j) {
    const double c = Coefficient(terms.disturbance, terms.n_disturbance, j, q);
    h += BoxExtreme(c, j, disturbance, +1.0, d.empty() ? nullptr : &d[j]);
  }
  return h;
}

void WorstCaseFromTerms(const AffineTerms& terms, std::span<const double> q,
                        const Box& planning_control, const Box& disturbance,
                        std::span<double> u_hat, std::span<double> d) {
  for (std::size_t j = 0; j < terms.n_planning; ++j) {
    const double c = Coefficient(terms.planning, terms.n_planning, j, q);
    BoxExtreme(c, j, planning_control, +1.0, &u_hat[j]);
  }
  for (std::size_t j = 0; j < terms.n_disturbance; ++j) {
    const double c = Coefficient(terms.disturbance, terms.n_disturbance, j, q);
    BoxExtreme(c, j, disturbance, +1.0, &d[j]);
  }
}

HamiltonianResult hamiltonian_affine(const RelativeSystem& rel,
                                     std::span<const double> r,
                                     std::span<const double> q) {
  RequireAffine(rel);
  if (r.size() != rel.dim() || q.size() != rel.dim()) {
    throw Error(ErrorCode::kInvalidArgument, "hamiltonian dimension");
  }
  AffineTerms terms = MakeTerms(rel);
  rel.affine(r, terms);
  HamiltonianResult res;
  res.u.resize(terms.n_control);
  res.u_hat.resize(terms.n_planning);
  res.d.resize(terms.n_disturbance);
  res.value = HamiltonianFromTerms(terms, q, rel.tracking.control,
                                   rel.planning.control,
                                   rel.tracking.disturbance, res.u, res.u_hat,
                                   res.d);
  return res;
}

std::vector<double> dissipation_bounds(const RelativeSystem& rel,
                                       const Grid& grid) {
  RequireAffine(rel);
  const std::size_t n = rel.dim();
  if (grid.ndims() != n) {
    throw Error(ErrorCode::kInvalidArgument, "grid/system dimension mismatch");
  }
  std::array<std::vector<double>, kParallelChunks> partial;
  ParallelChunks(grid.num_nodes(), [&](std::size_t c, std::size_t b,
                                       std::size_t e) {
    std::vector<double> alpha(n, 0.0);
    AffineTerms t = MakeTerms(rel);
    std::vector<double> x(n);
    for (std::size_t k = b; k < e; ++k) {
      grid.Point(k, x);
      t.Reset();
      rel.affine(x, t);
      for (std::size_t i = 0; i < n; ++i) {
        double center = t.drift[i];
        double spread = 0.0;
        auto add = [&](const std::vector<double>& m, std::size_t cols,
                       const Box& box) {
          for (std::size_t j = 0; j < cols; ++j) {
            center += m[i * cols + j] * box.mid(j);
            spread += std::abs(m[i * cols + j]) * box.half_width(j);
          }
        };
        add(t.control, t.n_control, rel.tracking.control);
        add(t.planning, t.n_planning, rel.planning.control);
        add(t.disturbance, t.n_disturbance, rel.tracking.disturbance);
        alpha[i] = std::max(alpha[i], std::abs(center) + spread);
      }
    }
    partial[c] = std::move(alpha);
  });
  std::vector<double> alpha(n, 0.0);
  for (const auto& p : partial) {
    for (std::size_t i = 0; i < p.size(); ++i) alpha[i] = std::max(alpha[i], p[i]);
  }
  return alpha;
}

double TrustedMin(const Grid& grid, std::span<const double> values) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> idx(grid.ndims());
  for (std::size_t i = 0; i < grid.num_nodes(); ++i) {
    grid.Unflatten(i, idx);
    if (grid.Interior(idx, kTrustedCells)) best = std::min(best, values[i]);
  }
  if (!std::isfinite(best)) {
    throw Error(ErrorCode::kDegenerate, "no trusted grid nodes");
  }
  return best;
}

double DefaultEpsilon(const Grid& grid, std::span<const double> values) {
  std::size_t arg = grid.num_nodes();
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> idx(grid.ndims());
  for (std::size_t i = 0; i < grid.num_nodes(); ++i) {
    grid.Unflatten(i, idx);
    if (grid.Interior(idx, kTrustedCells) && values[i] < best) {
      best = values[i];
      arg = i;
    }
  }
  if (arg == grid.num_nodes()) {
    throw Error(ErrorCode::kDegenerate, "no trusted grid nodes");
  }
  std::vector<std::size_t> center(grid.ndims());
  grid.Unflatten(arg, center);
  const long w = static_cast<long>(kTrustedCells);
  const long span = 2 * w + 1;
  std::size_t count = 1;
  for (std::size_t d = 0; d < grid.ndims(); ++d) count *= span;
  double eps = 0.0;
  std::vector<std::size_t> nb(grid.ndims());
  for (std::size_t c = 0; c < count; ++c) {
    std::size_t rest = c;
    bool inside = true;
    for (std::size_t d = 0; d < grid.ndims(); ++d) {
      const long off = static_cast<long>(rest % span) - w;
      rest /= span;
      const long n = static_cast<long>(grid.dim(d).nodes);
      long k = static_cast<long>(center[d]) + off;
      if (grid.dim(d).periodic) {
        k = ((k % n) + n) % n;
      } else if (k < 0 || k >= n) {
        inside = false;
        break;
      }
      nb[d] = static_cast<std::size_t>(k);
    }
    if (inside) eps = std::max(eps, values[grid.Flatten(nb)] - best);
  }
  return eps;
}

Grid DefaultGrid(const RelativeSystem& rel) {
  std::vector<GridDim> dims;
  for (std::size_t i = 0; i < rel.dim(); ++i) {
    dims.push_back({rel.domain.lo(i), rel.domain.hi(i), rel.default_nodes[i],
                    static_cast<bool>(rel.periodic[i])});
  }
  return Grid(std::move(dims));
}

namespace {

constexpr std::size_t kMaxInputs = 32;

// Input boxes in flat arrays: control, planning control, disturbance.
struct InputBoxes {
  std::size_t nu = 0;
  std::size_t np = 0;
  std::size_t nd = 0;
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<double> mid;
  std::vector<double> hw;

  explicit InputBoxes(const RelativeSystem& rel)
      : nu(rel.tracking.control.dim()),
        np(rel.planning.control.dim()),
        nd(rel.tracking.disturbance.dim()) {
    for (const Box* b : {&rel.tracking.control, &rel.planning.control,
                         &rel.tracking.disturbance}) {
      for (std::size_t j = 0; j < b->dim(); ++j) {
        lo.push_back(b->lo(j));
        hi.push_back(b->hi(j));
        mid.push_back(b->mid(j));
        hw.push_back(b->half_width(j));
      }
    }
    if (total() > kMaxInputs) {
      throw Error(ErrorCode::kUnsupportedModel, "too many input components");
    }
  }
  std::size_t total() const { return nu + np + nd; }
};

// Node terms packed as drift (n) followed by the n x (nu + np + nd) input
// matrix, row-major.
class TermCache {
 public:
  static constexpr std::size_t kBudgetBytes = std::size_t{768} << 20;

  TermCache(const RelativeSystem& rel, const Grid& grid)
      : rel_(rel),
        grid_(grid),
        n_(rel.dim()),
        m_(rel.tracking.control.dim() + rel.planning.control.dim() +
           rel.tracking.disturbance.dim()),
        stride_(n_ * (1 + m_)) {
    const double bytes = static_cast<double>(grid.num_nodes()) *
                         static_cast<double>(stride_) * sizeof(double);
    if (bytes > static_cast<double>(kBudgetBytes)) return;
    cache_.resize(grid.num_nodes() * stride_);
    ParallelChunks(grid.num_nodes(), [&](std::size_t, std::size_t b,
                                         std::size_t e) {
      AffineTerms t = MakeTerms(rel_);
      std::vector<double> x(n_);
      for (std::size_t k = b; k < e; ++k) {
        grid_.Point(k, x);
        Pack(x, t, &cache_[k * stride_]);
      }
    });
  }

  std::size_t stride() const { return stride_; }

  // Packed terms of node k; `scratch` holds stride() doubles when uncached.
  const double* Get(std::size_t k, std::span<const double> x, AffineTerms& t,
                    double* scratch) const {
    if (!cache_.empty()) return &cache_[k * stride_];
    Pack(x, t, scratch);
    return scratch;
  }

 private:
  void Pack(std::span<const double> x, AffineTerms& t, double* out) const {
    t.Reset();
    rel_.affine(x, t);
    for (std::size_t i = 0; i < n_; ++i) out[i] = t.drift[i];
    double* mat = out + n_;
    for (std::size_t i = 0; i < n_; ++i) {
      double* row = mat + i * m_;
      std::size_t c = 0;
      for (std::size_t j = 0; j < t.n_control; ++j) row[c++] = t.B_u(i, j);
      for (std::size_t j = 0; j < t.n_planning; ++j) row[c++] = t.B_p(i, j);
      for (std::size_t j = 0; j < t.n_disturbance; ++j) row[c++] = t.B_d(i, j);
    }
  }

  const RelativeSystem& rel_;
  const Grid& grid_;
  std::size_t n_;
  std::size_t m_;
  std::size_t stride_;
  std::vector<double> cache_;
};

inline double Smaller(double a, double b) {
  return std::abs(a) <= std::abs(b) ? a : b;
}

// H and, optionally, the local-local dissipation coefficients from packed
// terms. Input j of the packed matrix is minimized for j < nu and maximized
// otherwise. For the dissipation, an input whose coefficient q . B_j keeps
// one sign over the costate box [q_lo, q_hi] sits at that endpoint. The
// remaining inputs switch with the sign of their coefficient; inputs with
// parallel columns switch together, so their spreads combine before the
// absolute value is taken.
double PackedHamiltonian(const double* t, std::size_t n, const InputBoxes& in,
                         const double* q, const double* q_lo,
                         const double* q_hi, double* alpha) {
  const std::size_t m = in.total();
  const double* mat = t + n;
  double h = 0.0;
  std::array<double, kMaxGridDims> center{};
  std::array<double, kMaxGridDims> spread{};
  std::array<std::size_t, kMaxInputs> free_inputs{};
  std::size_t num_free = 0;
  for (std::size_t i = 0; i < n; ++i) {
    h += q[i] * t[i];
    center[i] = t[i];
  }
  for (std::size_t j = 0; j < m; ++j) {
    double c = 0.0;
    double c_lo = 0.0;
    double c_hi = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      const double b = mat[i * m + j];
      if (b == 0.0) continue;
      any = true;
      c += q[i] * b;
      if (alpha) {
        const double a1 = b * q_lo[i];
        const double a2 = b * q_hi[i];
        c_lo += std::min(a1, a2);
        c_hi += std::max(a1, a2);
      }
    }
    if (!any) continue;
    const double sign = j < in.nu ? -1.0 : 1.0;
    h += c * in.mid[j] + sign * std::abs(c) * in.hw[j];
    if (alpha) {
      double value = in.mid[j];
      if (c_lo >= 0.0) {
        value = sign > 0 ? in.hi[j] : in.lo[j];
      } else if (c_hi <= 0.0) {
        value = sign > 0 ? in.lo[j] : in.hi[j];
      } else {
        free_inputs[num_free++] = j;
      }
      for (std::size_t i = 0; i < n; ++i) center[i] += mat[i * m + j] * value;
    }
  }
  if (!alpha) return h;
  std::array<bool, kMaxInputs> grouped{};
  std::array<double, kMaxGridDims> w{};
  for (std::size_t a = 0; a < num_free; ++a) {
    if (grouped[a]) continue;
    const std::size_t lead = free_inputs[a];
    std::size_t pivot = 0;
    while (mat[pivot * m + lead] == 0.0) ++pivot;
    for (std::size_t i = 0; i < n; ++i) w[i] = 0.0;
    for (std::size_t b = a; b < num_free; ++b) {
      if (grouped[b]) continue;
      const std::size_t j = free_inputs[b];
      const double ratio = mat[pivot * m + j] / mat[pivot * m + lead];
      bool parallel = ratio != 0.0;
      for (std::size_t i = 0; i < n && parallel; ++i) {
        parallel = mat[i * m + j] == ratio * mat[i * m + lead];
      }
      if (!parallel) continue;
      grouped[b] = true;
      const double sign = j < in.nu ? -1.0 : 1.0;
      const double s = sign * in.hw[j] * (ratio > 0.0 ? 1.0 : -1.0);
      for (std::size_t i = 0; i < n; ++i) w[i] += mat[i * m + j] * s;
    }
    for (std::size_t i = 0; i < n; ++i) spread[i] += std::abs(w[i]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    alpha[i] = std::abs(center[i]) + spread[i];
  }
  return h;
}

struct StepStats {
  double change = 0.0;
  bool finite = true;
};

// One Lax-Friedrichs step from `v` into `out`.
StepStats LaxFriedrichsStep(const RelativeSystem& rel, const Grid& grid,
                            const TermCache& cache, const InputBoxes& inputs,
                            std::span<const double> alpha,
                            const std::vector<double>& l,
                            const std::vector<double>& v,
                            std::vector<double>& out, double dt,
                            bool monotone, bool local, bool second) {
  const std::size_t n = grid.ndims();
  std::array<StepStats, kParallelChunks> stats{};
  ParallelChunks(grid.num_nodes(), [&](std::size_t c, std::size_t b,
                                       std::size_t e) {
    AffineTerms terms = MakeTerms(rel);
    std::vector<double> scratch(cache.stride());
    std::array<double, kMaxGridDims> x{};
    std::array<double, kMaxGridDims> q{};
    std::array<double, kMaxGridDims> jump{};
    std::array<double, kMaxGridDims> q_lo{};
    std::array<double, kMaxGridDims> q_hi{};
    std::array<double, kMaxGridDims> local_alpha{};
    std::array<std::size_t, kMaxGridDims> idx{};
    std::array<double, kMaxGridDims> inv_dx{};
    for (std::size_t d = 0; d < n; ++d) inv_dx[d] = 1.0 / grid.dx(d);
    grid.Unflatten(b, std::span<std::size_t>(idx.data(), n));
    for (std::size_t d = 0; d < n; ++d) x[d] = grid.coord(d, idx[d]);
    StepStats s;
    for (std::size_t k = b; k < e; ++k) {
      const double vk = v[k];
      bool trusted = true;
      for (std::size_t d = 0; d < n; ++d) {
        const GridDim& g = grid.dim(d);
        const std::size_t kd = idx[d];
        const std::size_t sd = grid.stride(d);
        double dm;
        double dp;
        if (kd > 0 && kd + 1 < g.nodes) {
          dm = (vk - v[k - sd]) * inv_dx[d];
          dp = (v[k + sd] - vk) * inv_dx[d];
        } else if (g.periodic) {
          dm = (vk - v[grid.Neighbor(k, kd, d, -1)]) * inv_dx[d];
          dp = (v[grid.Neighbor(k, kd, d, +1)] - vk) * inv_dx[d];
        } else if (kd == 0) {
          dp = (v[k + sd] - vk) * inv_dx[d];
          dm = dp;
        } else {
          dm = (vk - v[k - sd]) * inv_dx[d];
          dp = dm;
        }
        if (second && (g.periodic || (kd >= 2 && kd + 2 < g.nodes))) {
          const std::size_t km = grid.Neighbor(k, kd, d, -1);
          const std::size_t kp = grid.Neighbor(k, kd, d, +1);
          const std::size_t kmm =
              grid.Neighbor(km, kd == 0 ? g.nodes - 1 : kd - 1, d, -1);
          const std::size_t kpp =
              grid.Neighbor(kp, kd + 1 == g.nodes ? 0 : kd + 1, d, +1);
          const double c2 = v[kp] - 2.0 * vk + v[km];
          const double m2 = vk - 2.0 * v[km] + v[kmm];
          const double p2 = v[kpp] - 2.0 * v[kp] + vk;
          dm += 0.5 * Smaller(m2, c2) * inv_dx[d];
          dp -= 0.5 * Smaller(c2, p2) * inv_dx[d];
        }
        if (!g.periodic &&
            (kd < kTrustedCells || kd + kTrustedCells >= g.nodes)) {
          trusted = false;
        }
        q[d] = 0.5 * (dm + dp);
        jump[d] = 0.5 * (dp - dm);
        q_lo[d] = std::min(dm, dp);
        q_hi[d] = std::max(dm, dp);
      }
      const double* t = cache.Get(
          k, std::span<const double>(x.data(), n), terms, scratch.data());
      const double ham =
          PackedHamiltonian(t, n, inputs, q.data(), q_lo.data(), q_hi.data(),
                            local ? local_alpha.data() : nullptr);
      double diss = 0.0;
      for (std::size_t d = 0; d < n; ++d) {
        diss += (local ? local_alpha[d] : alpha[d]) * jump[d];
      }
      double next = std::max(vk + dt * (ham + diss), l[k]);
      if (monotone) next = std::max(next, vk);
      if (!std::isfinite(next)) s.finite = false;
      out[k] = next;
      if (trusted) s.change = std::max(s.change, std::abs(next - vk));
      for (std::size_t d = n; d-- > 0;) {
        if (++idx[d] < grid.dim(d).nodes) {
          x[d] = grid.coord(d, idx[d]);
          break;
        }
        idx[d] = 0;
        x[d] = grid.dim(d).lo;
      }
    }
    stats[c] = s;
  });
  StepStats total;
  for (const StepStats& s : stats) {
    total.change = std::max(total.change, s.change);
    total.finite = total.finite && s.finite;
  }
  return total;
}

}  // namespace

ValueFunction solve_hjvi(const RelativeSystem& rel, const Grid& grid,
                         const SolverConfig& cfg) {
  cfg.Validate();
  RequireAffine(rel);
  if (grid.ndims() != rel.dim()) {
    throw Error(ErrorCode::kInvalidArgument, "grid/system dimension mismatch");
  }
  for (std::size_t d = 0; d < grid.ndims(); ++d) {
    if (grid.dim(d).periodic != static_cast<bool>(rel.periodic[d])) {
      throw Error(ErrorCode::kInvalidArgument,
                  "grid periodicity differs from the system in dimension " +
                      std::to_string(d));
    }
  }

  const GridFunction l = Sample(grid, [&](std::span<const double> r) {
    return rel.error(r);
  });
  const std::vector<double> alpha = dissipation_bounds(rel, grid);
  const TermCache cache(rel, grid);
  const InputBoxes inputs(rel);
  double rate = 0.0;
  for (std::size_t d = 0; d < grid.ndims(); ++d) rate += alpha[d] / grid.dx(d);
  const double interval =
      cfg.horizon / static_cast<double>(cfg.snapshots - 1);
  const double dt_max = rate > 0 ? cfg.cfl / rate : interval;

  ValueFunction vf;
  vf.grid = grid;
  vf.system_id = rel.name;
  vf.error_id = rel.error.id();
  vf.times.push_back(0.0);
  vf.values.push_back(l.values);

  std::vector<double> v = l.values;
  std::vector<double> next(v.size());
  std::vector<double> stage;
  std::vector<char> trusted;
  if (cfg.order == 2) {
    stage.resize(v.size());
    trusted.resize(v.size());
    std::vector<std::size_t> idx(grid.ndims());
    for (std::size_t k = 0; k < v.size(); ++k) {
      grid.Unflatten(k, idx);
      trusted[k] = grid.Interior(idx, kTrustedCells);
    }
  }
  double tau = 0.0;
  std::size_t steps = 0;
  bool truncated = false;
  for (std::size_t snap = 1; snap < cfg.snapshots && !vf.converged &&
                             !truncated;
       ++snap) {
    const double target =
        snap + 1 == cfg.snapshots ? cfg.horizon
                                  : cfg.horizon * static_cast<double>(snap) /
                                        static_cast<double>(cfg.snapshots - 1);
    const double span = target - tau;
    const auto substeps = static_cast<std::size_t>(
        std::max(1.0, std::ceil(span / dt_max - 1e-9)));
    const double dt = span / static_cast<double>(substeps);
    for (std::size_t s = 0; s < substeps; ++s) {
      if (steps >= cfg.max_steps) {
        truncated = true;
        break;
      }
      const bool local = cfg.dissipation == Dissipation::kLocalLocal;
      StepStats st;
      if (cfg.order == 1) {
        st = LaxFriedrichsStep(rel, grid, cache, inputs, alpha, l.values, v,
                               next, dt, cfg.monotone, local, false);
      } else {
        st = LaxFriedrichsStep(rel, grid, cache, inputs, alpha, l.values, v,
                               stage, dt, false, local, true);
        const StepStats s2 =
            LaxFriedrichsStep(rel, grid, cache, inputs, alpha, l.values,
                              stage, next, dt, false, local, true);
        st.finite = st.finite && s2.finite;
        st.change = 0.0;
        for (std::size_t k = 0; k < v.size(); ++k) {
          double x = std::max(0.5 * (v[k] + next[k]), l.values[k]);
          if (cfg.monotone) x = std::max(x, v[k]);
          if (trusted[k]) st.change = std::max(st.change, std::abs(x - v[k]));
          next[k] = x;
        }
      }
      ++steps;
      if (!st.finite) {
        throw Error(ErrorCode::kNumericalFailure,
                    "non-finite value at step " + std::to_string(steps),
                    steps);
      }
      v.swap(next);
      tau = s + 1 == substeps ? target : tau + dt;
      if (cfg.stop_on_convergence && st.change / dt < cfg.tolerance) {
        vf.converged = true;
        break;
      }
    }
    if (vf.converged) {
      vf.times = {tau};
      vf.values = {v};
    } else if (!truncated || tau > vf.times.back()) {
      vf.times.push_back(tau);
      vf.values.push_back(v);
    }
  }
  vf.steps = steps;
  const std::vector<double>& last = vf.values.back();
  try {
    vf.min_value = TrustedMin(grid, last);
    vf.epsilon = DefaultEpsilon(grid, last);
  } catch (const Error&) {
    vf.min_value = *std::min_element(last.begin(), last.end());
    vf.epsilon = 0.0;
  }
  return vf;
}

namespace {

bool SameDynamics(const RelativeSystem& a, const RelativeSystem& b,
                  const Grid& grid) {
  if (a.dim() != b.dim() || !(a.tracking.control == b.tracking.control) ||
      !(a.planning.control == b.planning.control) ||
      !(a.tracking.disturbance == b.tracking.disturbance) ||
      a.error.id() != b.error.id() || a.periodic != b.periodic) {
    return false;
  }
  AffineTerms ta = MakeTerms(a);
  AffineTerms tb = MakeTerms(b);
  std::vector<double> x(grid.ndims());
  for (std::size_t k = 0; k < grid.num_nodes(); ++k) {
    grid.Point(k, x);
    ta.Reset();
    tb.Reset();
    a.affine(x, ta);
    b.affine(x, tb);
    if (ta.drift != tb.drift || ta.control != tb.control ||
        ta.planning != tb.planning || ta.disturbance != tb.disturbance) {
      return false;
    }
  }
  return true;
}

}  // namespace

DecomposedSolution solve_decomposed(const std::vector<Subsystem>& subsystems,
                                    const std::vector<Grid>& grids,
                                    const SolverConfig& cfg) {
  if (subsystems.empty() || grids.size() != subsystems.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "need one grid per subsystem and at least one subsystem");
  }
  std::set<std::size_t> states;
  for (const Subsystem& s : subsystems) {
    for (std::size_t i : s.state_dims) {
      if (!states.insert(i).second) {
        throw Error(ErrorCode::kInvalidDecomposition,
                    "state " + std::to_string(i) +
                        " appears in more than one subsystem");
      }
    }
  }
  DecomposedSolution out;
  out.min_value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < subsystems.size(); ++i) {
    const RelativeSystem& rel = subsystems[i].system;
    std::size_t reuse = i;
    for (std::size_t j = 0; j < i; ++j) {
      if (grids[j] == grids[i] &&
          SameDynamics(subsystems[j].system, rel, grids[i])) {
        reuse = j;
        break;
      }
    }
    if (reuse < i) {
      ValueFunction copy = out.parts[reuse];
      copy.system_id = rel.name;
      out.parts.push_back(std::move(copy));
    } else {
      out.parts.push_back(solve_hjvi(rel, grids[i], cfg));
    }
    out.min_value = std::max(out.min_value, out.parts.back().min_value);
  }
  return out;
}

}  // namespace fastrack
