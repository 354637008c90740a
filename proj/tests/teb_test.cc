#include "fastrack/teb.h"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "fastrack/error.h"

namespace fastrack {
namespace {

std::vector<double> Rk4(const RelativeSystem& rel, std::span<const double> r,
                        std::span<const double> u, std::span<const double> uh,
                        std::span<const double> d, double dt) {
  auto f = [&](const std::vector<double>& x) {
    return relative_flow(rel, x, u, uh, d);
  };
  const std::vector<double> x0(r.begin(), r.end());
  auto axpy = [](const std::vector<double>& x, const std::vector<double>& k,
                 double h) {
    std::vector<double> y = x;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += h * k[i];
    return y;
  };
  const auto k1 = f(x0);
  const auto k2 = f(axpy(x0, k1, dt / 2));
  const auto k3 = f(axpy(x0, k2, dt / 2));
  const auto k4 = f(axpy(x0, k3, dt));
  std::vector<double> out = x0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] += dt / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  }
  return out;
}

const TrackingBound& Strong() {
  static const TrackingBound tb = [] {
    const auto m = make_model("rel1d");
    const Grid g({{-1, 1, 201, false}});
    return TrackingBound(m.system, solve_hjvi(m.system, g, SolverConfig{}));
  }();
  return tb;
}

// V(r, tau) = (|r| + 0.2 tau)^2 on [-2, 2], horizon 2.
const TrackingBound& Weak() {
  static const TrackingBound tb = [] {
    const auto m = make_model("rel1d", {{"u_max", 0.5}});
    const Grid g({{-2, 2, 401, false}});
    SolverConfig cfg;
    cfg.horizon = 2.0;
    cfg.snapshots = 201;
    return TrackingBound(m.system, solve_hjvi(m.system, g, cfg));
  }();
  return tb;
}

std::vector<double> Pt(double x) { return {x}; }

TEST(MinValue, StrongTrackerNearZero) {
  EXPECT_LT(min_value(Strong()), 1e-3);
  EXPECT_GE(min_value(Strong()), 0.0);
  EXPECT_DOUBLE_EQ(min_value(Strong()), Strong().min_value());
}

TEST(MinValue, AllUntrustedIsDegenerate) {
  ValueFunction vf;
  vf.grid = Grid({{0, 1, 4, false}});
  vf.times = {0.0};
  vf.values = {{1, 2, 3, 4}};
  try {
    min_value(vf);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerate);
  }
}

TEST(InTeb, ArgminFarAndOffGrid) {
  const TrackingBound& tb = Weak();
  const TebQuery q = tb.Query(0.0);
  EXPECT_TRUE(in_teb(tb, Pt(0.0), tb.horizon(), q));
  EXPECT_TRUE(in_teb(tb, Pt(0.0), 0.0, q));
  EXPECT_FALSE(in_teb(tb, Pt(1.9), tb.horizon(), q));
  try {
    in_teb(tb, Pt(2.5), 0.0, q);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOutOfDomain);
    EXPECT_EQ(*e.detail(), 0u);
  }
}

TEST(InTeb, WeakTrackerBoundaryGrowsAtRate) {
  const TrackingBound& tb = Weak();
  const TebQuery q = tb.Query(0.0);
  for (double tau : {0.5, 1.0, 1.5, 2.0}) {
    EXPECT_TRUE(in_teb(tb, Pt(0.2 * tau - 0.02), tau, q)) << tau;
    EXPECT_TRUE(in_teb(tb, Pt(-0.2 * tau + 0.02), tau, q)) << tau;
    EXPECT_FALSE(in_teb(tb, Pt(0.2 * tau + 0.02), tau, q)) << tau;
  }
}

TEST(SmallestTau, WeakTracker) {
  const TrackingBound& tb = Weak();
  const TebQuery q = tb.Query(0.0);
  EXPECT_EQ(smallest_tau(tb, Pt(0.0), q), std::optional<double>(0.0));
  const auto tau = smallest_tau(tb, Pt(0.11), q);
  ASSERT_TRUE(tau.has_value());
  EXPECT_GE(*tau, 0.55 - 0.05);
  EXPECT_LE(*tau, 0.55 + 0.06);
  EXPECT_FALSE(smallest_tau(tb, Pt(1.5), q).has_value());
  EXPECT_FALSE(smallest_tau(tb, Pt(3.0), q).has_value());
}

TEST(Extents, WeakTrackerMatchesRateAndNests) {
  const TrackingBound& tb = Weak();
  const auto table = ExtentTable(tb, tb.Query(0.0));
  ASSERT_EQ(table.size(), 201u);
  const double dx = 0.01;
  for (std::size_t k = 0; k < table.size(); ++k) {
    const auto& e = table[k];
    EXPECT_NEAR(e.half_width[0], 0.2 * e.tau, dx) << e.tau;
    if (k > 0) {
      EXPECT_GE(e.half_width[0], table[k - 1].half_width[0]);
    }
    EXPECT_FALSE(e.touches_boundary);
  }
  EXPECT_DOUBLE_EQ(table.back().position_radius, table.back().half_width[0]);
}

TEST(Extents, EmptySetIsDegenerate) {
  const TrackingBound& tb = Weak();
  TebQuery q = tb.Query(0.0);
  q.level = -1.0;
  EXPECT_THROW(teb_extents(tb, 0.0, q), Error);
}

TEST(Control, Rel1dEndpoints) {
  const TrackingBound& tb = Strong();
  EXPECT_EQ(optimal_tracking_control(tb, Pt(0.5), 0.0)[0], -1.0);
  EXPECT_EQ(optimal_tracking_control(tb, Pt(-0.5), 0.0)[0], 1.0);
  const WorstCase wc = worst_case_inputs(tb, Pt(0.5), 0.0);
  EXPECT_EQ(wc.u_hat[0], -0.5);
  EXPECT_EQ(wc.d[0], 0.2);
  EXPECT_THROW(optimal_tracking_control(tb, Pt(1.5), 0.0), Error);
}

TEST(Control, ZeroGradientGivesMidpoints) {
  const auto m = make_model("quad10d_int3d");
  const Subsystem& z = m.subsystems[2];
  ValueFunction vf;
  vf.grid = Grid({{-1, 1, 11, false}, {-2, 2, 11, false}});
  vf.times = {0.0};
  vf.values = {std::vector<double>(vf.grid.num_nodes(), 0.7)};
  vf.converged = true;
  const TrackingBound tb(z.system, vf);
  const std::vector<double> r = {0.13, -0.4};
  EXPECT_DOUBLE_EQ(optimal_tracking_control(tb, r, 0.0)[0],
                   z.system.tracking.control.mid(0));
  const WorstCase wc = worst_case_inputs(tb, r, 0.0);
  EXPECT_DOUBLE_EQ(wc.u_hat[0], 0.0);
  EXPECT_DOUBLE_EQ(wc.d[0], 0.0);
}

TEST(Control, QuadZMinimumThrustWhenVelocityCostRises) {
  const auto m = make_model("quad10d_int3d");
  const Subsystem& z = m.subsystems[2];
  ValueFunction vf;
  vf.grid = Grid({{-1, 1, 21, false}, {-2, 2, 21, false}});
  vf.times = {0.0};
  vf.values = {Sample(vf.grid, [](std::span<const double> x) {
                 return 0.1 * x[0] + x[1];
               }).values};
  vf.converged = true;
  const TrackingBound tb(z.system, vf);
  const std::vector<double> r = {0.3, 0.5};
  EXPECT_EQ(optimal_tracking_control(tb, r, 0.0)[0], 0.0);
}

TEST(Control, ComposedPartsMapIntoFullInputs) {
  const auto m = make_model("quad10d_int3d");
  std::vector<ValueFunction> parts;
  for (const Subsystem& s : m.subsystems) {
    ValueFunction vf;
    std::vector<GridDim> dims;
    for (std::size_t d = 0; d < s.system.dim(); ++d) {
      dims.push_back({s.system.domain.lo(d), s.system.domain.hi(d), 5, false});
    }
    vf.grid = Grid(dims);
    vf.times = {0.0};
    // V increases with the last state of each part.
    vf.values = {Sample(vf.grid, [](std::span<const double> x) {
                   return x[x.size() - 1];
                 }).values};
    vf.converged = true;
    parts.push_back(vf);
  }
  const TrackingBound tb(m.system, m.subsystems, parts);
  EXPECT_TRUE(tb.converged());
  const std::vector<double> r(10, 0.0);
  const auto u = optimal_tracking_control(tb, r, 0.0);
  ASSERT_EQ(u.size(), 3u);
  // x and y parts: omega rises with u, so u is at its lower bound.
  EXPECT_EQ(u[0], m.system.tracking.control.lo(0));
  EXPECT_EQ(u[1], m.system.tracking.control.lo(1));
  EXPECT_EQ(u[2], m.system.tracking.control.lo(2));
  EXPECT_DOUBLE_EQ(tb.Value(r, 0.0), 0.0);
}

TEST(Control, WorstCaseMatchesLatticeMaximizer) {
  const auto m = make_model("dint2d");
  SolverConfig cfg;
  cfg.horizon = 2.0;
  cfg.snapshots = 3;
  const Grid g({{-1, 1, 41, false}, {-1.5, 1.5, 41, false}});
  const TrackingBound tb(m.system, solve_hjvi(m.system, g, cfg));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ux(-0.8, 0.8);
  for (int trial = 0; trial < 50; ++trial) {
    const std::vector<double> r = {ux(rng), ux(rng)};
    const double tau = 0.0;
    std::vector<double> grad(2);
    InterpolateGradient(g, tb.part(0).values[tb.CeilIndex(0, tau)], r, grad);
    const auto u = optimal_tracking_control(tb, r, tau);
    const WorstCase wc = worst_case_inputs(tb, r, tau);
    auto dot = [&](std::span<const double> uh, std::span<const double> d) {
      const auto f = relative_flow(m.system, r, u, uh, d);
      return grad[0] * f[0] + grad[1] * f[1];
    };
    const double analytic = dot(wc.u_hat, wc.d);
    const Box& pb = m.system.planning.control;
    const Box& db = m.system.tracking.disturbance;
    for (int a = 0; a <= 8; ++a) {
      for (int b = 0; b <= 8; ++b) {
        const std::vector<double> uh = {pb.lo(0) + (pb.hi(0) - pb.lo(0)) * a / 8};
        const std::vector<double> d = {db.lo(0) + (db.hi(0) - db.lo(0)) * b / 8};
        EXPECT_GE(analytic, dot(uh, d) - 1e-12);
      }
    }
  }
}

// V(r(t'), T - t') <= V(r(t), T - t) along optimal vs worst-case play, with
// steps aligned to stored horizons.
TEST(Invariance, TrajectoryValueNonIncreasingWeakTracker) {
  const TrackingBound& tb = Weak();
  const RelativeSystem& rel = tb.system();
  const double dt = 0.01;
  for (double r0 : {0.0, 0.05, -0.1, 0.3, -0.6}) {
    std::vector<double> r = {r0};
    double prev = tb.Value(r, 0.0);
    for (int k = 0; k < 200; ++k) {
      const double tau = k * dt;
      const auto u = optimal_tracking_control(tb, r, tau);
      const WorstCase wc = worst_case_inputs(tb, r, tau);
      r = Rk4(rel, r, u, wc.u_hat, wc.d, dt);
      const double v = tb.Value(r, tau + dt);
      EXPECT_LE(v, prev + 1e-3) << "r0=" << r0 << " step " << k;
      prev = v;
    }
  }
}

TEST(Invariance, TrajectoryValueNonIncreasingDint2d) {
  const auto m = make_model("dint2d");
  const Grid g({{-1, 1, 61, false}, {-1.5, 1.5, 61, false}});
  SolverConfig cfg;
  cfg.horizon = 3.0;
  cfg.snapshots = 301;
  const TrackingBound tb(m.system, solve_hjvi(m.system, g, cfg));
  const double dt = 0.01;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ux(-0.3, 0.3);
  for (int trial = 0; trial < 8; ++trial) {
    std::vector<double> r = {ux(rng), ux(rng)};
    const double start = tb.Value(r, 0.0);
    double prev = start;
    double peak = start;
    for (int k = 0; k < 300; ++k) {
      const double tau = k * dt;
      const auto u = optimal_tracking_control(tb, r, tau);
      const WorstCase wc = worst_case_inputs(tb, r, tau);
      r = Rk4(m.system, r, u, wc.u_hat, wc.d, dt);
      const double v = tb.Value(r, tau + dt);
      EXPECT_LE(v, prev + 2e-3) << "trial " << trial << " step " << k;
      prev = v;
      peak = std::max(peak, v);
    }
    EXPECT_LE(peak, start + 0.01) << "trial " << trial;
  }
}

// Random inputs leave the smallest enclosing TEB unchanged or shrinking at
// least as often as worst-case inputs.
TEST(Invariance, SuboptimalInputsHelpTheTracker) {
  const TrackingBound& tb = Weak();
  const RelativeSystem& rel = tb.system();
  const TebQuery q = tb.Query(0.0);
  auto count = [&](bool adversarial, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uh(-0.5, 0.5);
    std::uniform_real_distribution<double> dd(-0.2, 0.2);
    std::vector<double> r = {0.0};
    int good = 0;
    double last = *smallest_tau(tb, r, q);
    for (int k = 0; k < 150; ++k) {
      const double tau = k * 0.01;
      const auto u = optimal_tracking_control(tb, r, tau);
      std::vector<double> a = {uh(rng)};
      std::vector<double> d = {dd(rng)};
      if (adversarial) {
        const WorstCase wc = worst_case_inputs(tb, r, tau);
        a = wc.u_hat;
        d = wc.d;
      }
      r = Rk4(rel, r, u, a, d, 0.01);
      const auto s = smallest_tau(tb, r, q);
      if (!s) break;
      if (*s <= last) ++good;
      last = *s;
    }
    return good;
  };
  for (unsigned seed = 1; seed <= 5; ++seed) {
    EXPECT_GE(count(false, seed), count(true, seed)) << seed;
  }
}

TEST(TrackingBound, RejectsMismatchedParts) {
  const auto m = make_model("rel1d", {{"dims", 2}});
  ValueFunction vf;
  vf.grid = Grid({{-1, 1, 11, false}});
  vf.times = {0.0};
  vf.values = {std::vector<double>(11, 0.0)};
  EXPECT_THROW(TrackingBound(m.system, {m.subsystems[0]}, {vf, vf}), Error);
  auto overlap = m.subsystems;
  overlap[1].state_dims = {0};
  EXPECT_THROW(TrackingBound(m.system, overlap, {vf, vf}), Error);
  ValueFunction other = vf;
  other.times = {0.0, 1.0};
  other.values = {vf.values[0], vf.values[0]};
  ValueFunction third = other;
  third.times = {0.0, 2.0};
  EXPECT_THROW(TrackingBound(m.system, m.subsystems, {other, third}), Error);
}

TEST(TrackingBound, LookupRules) {
  const TrackingBound& tb = Weak();
  EXPECT_DOUBLE_EQ(tb.horizon(), 2.0);
  // tau = 0.105 -> T - tau = 1.895; ceil 1.9 (index 190), floor 1.89.
  EXPECT_EQ(tb.CeilIndex(0, 0.105), 190u);
  EXPECT_EQ(tb.FloorIndex(0, 0.105), 189u);
  EXPECT_EQ(tb.CeilIndex(0, 0.1), 190u);
  EXPECT_EQ(tb.FloorIndex(0, 0.1), 190u);
  EXPECT_EQ(tb.FloorIndex(0, 5.0), 0u);
  EXPECT_EQ(tb.CeilIndex(0, -1.0), 200u);
}

TEST(Margins, RotationUsesRadius) {
  const auto car = make_model("car5d_car3d").system;
  TebExtents e;
  e.dims = car.error_dims;
  e.half_width = {0.03, 0.04, 0.5};
  e.position_radius = 0.05;
  EXPECT_EQ(PositionMargins(car, e), (std::vector<double>{0.05, 0.05}));
  const auto quad = make_model("quad10d_int3d").system;
  TebExtents f;
  f.dims = quad.error_dims;
  f.half_width.assign(f.dims.size(), 0.0);
  for (std::size_t k = 0; k < f.dims.size(); ++k) {
    f.half_width[k] = 0.1 * static_cast<double>(k + 1);
  }
  const auto pm = PositionMargins(quad, f);
  ASSERT_EQ(pm.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    const std::size_t col = quad.planning.position_dims[k];
    std::size_t row = 0;
    while (!quad.q[row][col]) ++row;
    EXPECT_DOUBLE_EQ(pm[k], f.HalfWidth(row));
  }
  EXPECT_TRUE(VelocityMargins(quad, f).empty());
}

}  // namespace
}  // namespace fastrack
