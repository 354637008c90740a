#include "fastrack/catalog.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <utility>

#include "fastrack/error.h"

namespace fastrack {

std::uint64_t Fnv1a(const void* data, std::size_t size, std::uint64_t seed) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t Fnv1a(const std::string& s) { return Fnv1a(s.data(), s.size()); }

std::string ModelInstance::CanonicalParams() const {
  std::string out = name;
  char buf[64];
  for (const auto& [key, value] : params) {
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    out += ";" + key + "=" + buf;
  }
  return out;
}

namespace {

using Params = std::map<std::string, double>;
using Pairs = std::vector<std::pair<std::size_t, std::size_t>>;

std::vector<std::vector<int>> MatchMatrix(std::size_t n, std::size_t np,
                                          const Pairs& ones) {
  std::vector<std::vector<int>> q(n, std::vector<int>(np, 0));
  for (auto [row, col] : ones) q[row][col] = 1;
  return q;
}

std::vector<std::size_t> Range(std::size_t begin, std::size_t end) {
  std::vector<std::size_t> v;
  for (std::size_t i = begin; i < end; ++i) v.push_back(i);
  return v;
}

std::vector<std::string> Names(const std::string& stem, std::size_t n) {
  if (n == 1) return {stem};
  std::vector<std::string> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back(stem + std::to_string(i));
  return v;
}

Box Concat(const std::vector<Box>& parts) {
  std::vector<double> lo;
  std::vector<double> hi;
  for (const Box& b : parts) {
    lo.insert(lo.end(), b.lo().begin(), b.lo().end());
    hi.insert(hi.end(), b.hi().begin(), b.hi().end());
  }
  return Box(std::move(lo), std::move(hi));
}

// Single integrator planning model in `n` position dimensions.
PlanningModel SingleIntegrator(const std::string& name,
                               const std::vector<std::string>& names,
                               double speed) {
  PlanningModel m;
  m.name = name;
  m.state_names = names;
  const std::size_t n = names.size();
  m.control = Box::Symmetric(n, speed);
  m.affine = [n](std::span<const double>, AffineTerms& t) {
    for (std::size_t i = 0; i < n; ++i) t.B_u(i, i) = 1.0;
  };
  m.position_dims = Range(0, n);
  m.single_integrator = true;
  return m;
}

// ---------------------------------------------------------------- rel1d

struct Rel1dParams {
  double u_max;
  double uhat_max;
  double d_max;
};

RelativeSystem MakeRel1d(const Rel1dParams& prm, std::size_t k) {
  RelativeSystem rel;
  rel.name = k == 1 ? "rel1d" : "rel1d_x" + std::to_string(k);

  TrackingModel& tr = rel.tracking;
  tr.name = "integrator";
  tr.state_names = Names("x", k);
  tr.control = Box::Symmetric(k, prm.u_max);
  tr.disturbance = Box::Symmetric(k, prm.d_max);
  tr.affine = [k](std::span<const double>, AffineTerms& t) {
    for (std::size_t i = 0; i < k; ++i) {
      t.B_u(i, i) = 1.0;
      t.B_d(i, i) = 1.0;
    }
  };

  rel.planning = SingleIntegrator("integrator", Names("xhat", k), prm.uhat_max);

  Pairs ones;
  for (std::size_t i = 0; i < k; ++i) ones.emplace_back(i, i);
  rel.q = MatchMatrix(k, k, ones);
  rel.error_dims = Range(0, k);
  rel.periodic.assign(k, false);
  rel.error = k == 1 ? ErrorFunction::SumOfSquares({0})
                     : ErrorFunction::MaxOfSquares(Range(0, k));
  rel.affine = [k](std::span<const double>, AffineTerms& t) {
    for (std::size_t i = 0; i < k; ++i) {
      t.B_u(i, i) = 1.0;
      t.B_p(i, i) = -1.0;
      t.B_d(i, i) = 1.0;
    }
  };
  rel.performance = [k](std::span<const double> r,
                        std::span<const double> u_hat, double w,
                        std::span<double> u) {
    for (std::size_t i = 0; i < k; ++i) {
      u[i] = (u_hat.empty() ? 0.0 : u_hat[i]) - w * r[i];
    }
  };
  rel.domain = Box::Symmetric(k, 1.0);
  rel.default_nodes.assign(k, k == 1 ? 201 : 101);
  return rel;
}

ModelInstance BuildRel1d(const Params& p) {
  const double dims_value = p.at("dims");
  if (dims_value < 1 || dims_value > 3 || dims_value != std::floor(dims_value)) {
    throw Error(ErrorCode::kInvalidArgument, "rel1d: dims must be 1, 2 or 3");
  }
  const auto k = static_cast<std::size_t>(dims_value);
  const Rel1dParams prm{p.at("u_max"), p.at("uhat_max"), p.at("d_max")};
  ModelInstance m;
  m.system = MakeRel1d(prm, k);
  if (k > 1) {
    for (std::size_t i = 0; i < k; ++i) {
      Subsystem sub;
      sub.name = "x" + std::to_string(i);
      sub.system = MakeRel1d(prm, 1);
      sub.state_dims = {i};
      sub.control_dims = {i};
      sub.planning_control_dims = {i};
      sub.disturbance_dims = {i};
      m.subsystems.push_back(std::move(sub));
    }
  }
  return m;
}

// ---------------------------------------------------------------- dint2d

ModelInstance BuildDint2d(const Params& p) {
  const double u_max = p.at("u_max");
  const double uhat_max = p.at("uhat_max");
  const double d_max = p.at("d_max");

  RelativeSystem rel;
  rel.name = "dint2d";
  TrackingModel& tr = rel.tracking;
  tr.name = "double_integrator";
  tr.state_names = {"x", "v"};
  tr.control = Box::Symmetric(1, u_max);
  tr.disturbance = Box::Symmetric(1, d_max);
  tr.affine = [](std::span<const double> s, AffineTerms& t) {
    t.drift[0] = s[1];
    t.B_u(1, 0) = 1.0;
    t.B_d(0, 0) = 1.0;
  };
  rel.planning = SingleIntegrator("integrator", {"xhat"}, uhat_max);
  rel.q = MatchMatrix(2, 1, {{0, 0}});
  rel.error_dims = {0};
  rel.aux_dims = {1};
  rel.periodic = {false, false};
  rel.error = ErrorFunction::SumOfSquares({0});
  rel.affine = [](std::span<const double> r, AffineTerms& t) {
    t.drift[0] = r[1];
    t.B_u(1, 0) = 1.0;
    t.B_p(0, 0) = -1.0;
    t.B_d(0, 0) = 1.0;
  };
  rel.performance = [](std::span<const double> r,
                       std::span<const double> u_hat, double w,
                       std::span<double> u) {
    const double vhat = u_hat.empty() ? 0.0 : u_hat[0];
    u[0] = -w * w * r[0] - 2.0 * w * (r[1] - vhat);
  };
  rel.domain = Box({-1.0, -1.5}, {1.0, 1.5});
  rel.default_nodes = {101, 101};

  ModelInstance m;
  m.system = std::move(rel);
  return m;
}

// ---------------------------------------------------------------- car

ModelInstance BuildCar(const Params& p) {
  const double a_max = p.at("a_max");
  const double alpha_max = p.at("alpha_max");
  const double vhat = p.at("vhat");
  const double omegahat_max = p.at("omegahat_max");

  RelativeSystem rel;
  rel.name = "car5d_car3d";
  TrackingModel& tr = rel.tracking;
  tr.name = "car5d";
  tr.state_names = {"x", "y", "theta", "v", "omega"};
  tr.control = Box({-a_max, -alpha_max}, {a_max, alpha_max});
  tr.disturbance = Box::Symmetric(std::vector<double>{
      p.at("dx_max"), p.at("dy_max"), p.at("da_max"), p.at("dalpha_max")});
  tr.affine = [](std::span<const double> s, AffineTerms& t) {
    t.drift[0] = s[3] * std::cos(s[2]);
    t.drift[1] = s[3] * std::sin(s[2]);
    t.drift[2] = s[4];
    t.B_u(3, 0) = 1.0;
    t.B_u(4, 1) = 1.0;
    t.B_d(0, 0) = 1.0;
    t.B_d(1, 1) = 1.0;
    t.B_d(3, 2) = 1.0;
    t.B_d(4, 3) = 1.0;
  };

  PlanningModel& pl = rel.planning;
  pl.name = "car3d";
  pl.state_names = {"xhat", "yhat", "thetahat"};
  pl.control = Box::Symmetric(1, omegahat_max);
  pl.affine = [vhat](std::span<const double> q, AffineTerms& t) {
    t.drift[0] = vhat * std::cos(q[2]);
    t.drift[1] = vhat * std::sin(q[2]);
    t.B_u(2, 0) = 1.0;
  };
  pl.position_dims = {0, 1};
  pl.heading_dim = 2;

  rel.transform = Transform::kPlanarRotation;
  rel.rotated_dims = {0, 1};
  rel.rotation_heading = 2;
  rel.rotated_disturbance = {0, 1};
  rel.q = MatchMatrix(5, 3, {{0, 0}, {1, 1}, {2, 2}});
  rel.error_dims = {0, 1, 2};
  rel.aux_dims = {3, 4};
  rel.periodic = {false, false, true, false, false};
  rel.error = ErrorFunction::SumOfSquares({0, 1});
  rel.affine = [vhat](std::span<const double> r, AffineTerms& t) {
    t.drift[0] = -vhat + r[3] * std::cos(r[2]);
    t.drift[1] = r[3] * std::sin(r[2]);
    t.drift[2] = r[4];
    t.B_p(0, 0) = r[1];
    t.B_p(1, 0) = -r[0];
    t.B_p(2, 0) = -1.0;
    t.B_u(3, 0) = 1.0;
    t.B_u(4, 1) = 1.0;
    t.B_d(0, 0) = 1.0;
    t.B_d(1, 1) = 1.0;
    t.B_d(3, 2) = 1.0;
    t.B_d(4, 3) = 1.0;
  };
  rel.performance = [vhat](std::span<const double> r,
                           std::span<const double> u_hat, double w,
                           std::span<double> u) {
    const double omega_hat = u_hat.empty() ? 0.0 : u_hat[0];
    // Lateral error is corrected through a heading offset.
    const double lateral_gain = std::min(w / std::max(vhat, 1e-3), 10.0);
    const double heading_target = -std::atan(lateral_gain * r[1]);
    u[0] = -w * w * r[0] - 2.0 * w * (r[3] - vhat);
    u[1] = -w * w * WrapAngle(r[2] - heading_target) -
           2.0 * w * (r[4] - omega_hat);
  };
  rel.domain = Box({-0.2, -0.2, -std::numbers::pi, -0.3, -3.0},
                   {0.2, 0.2, std::numbers::pi, 0.5, 3.0});
  rel.default_nodes = {31, 31, 45, 27, 47};

  ModelInstance m;
  m.system = std::move(rel);
  return m;
}

// ---------------------------------------------------------------- quads

struct QuadParams {
  double d0, d1, n0, kT, g;
  double uxy_max;
};

QuadParams ReadQuad(const Params& p) {
  return {p.at("d0"), p.at("d1"), p.at("n0"),
          p.at("kT"), p.at("g"),  p.at("u_xy_max")};
}

// Near-hover axis block (position-like, velocity, angle, rate) starting at
// row `o`, driven by control column `c` and disturbance column `c`.
void AxisTerms(const QuadParams& q, std::span<const double> x, std::size_t o,
               std::size_t c, AffineTerms& t) {
  t.drift[o] = x[o + 1];
  t.drift[o + 1] = q.g * std::tan(x[o + 2]);
  t.drift[o + 2] = -q.d1 * x[o + 2] + x[o + 3];
  t.drift[o + 3] = -q.d0 * x[o + 2];
  t.B_u(o + 3, c) = q.n0;
  t.B_d(o, c) = 1.0;
}

void VerticalTerms(const QuadParams& q, std::span<const double> x,
                   std::size_t o, std::size_t c, AffineTerms& t) {
  t.drift[o] = x[o + 1];
  t.drift[o + 1] = -q.g;
  t.B_u(o + 1, c) = q.kT;
  t.B_d(o, c) = 1.0;
}

double AxisPerformance(const QuadParams& q, double pos_err, double vel_err,
                       double accel_ff, double w) {
  const double a = accel_ff - w * w * pos_err - 2.0 * w * vel_err;
  return std::atan(a / q.g);
}

std::vector<std::string> AxisNames(const std::string& a) {
  return {a, "v" + a, "th" + a, "w" + a};
}

Box AxisDomain(double pos, double vel) {
  return Box({-pos, -vel, -0.6, -6.0}, {pos, vel, 0.6, 6.0});
}

TrackingModel QuadAxisTracking(const QuadParams& q, const std::string& axis,
                               double d_max) {
  TrackingModel tr;
  tr.name = "quad4d_" + axis;
  tr.state_names = AxisNames(axis);
  tr.control = Box::Symmetric(1, q.uxy_max);
  tr.disturbance = Box::Symmetric(1, d_max);
  tr.affine = [q](std::span<const double> s, AffineTerms& t) {
    AxisTerms(q, s, 0, 0, t);
  };
  return tr;
}

// 4D axis of the 10D quadrotor tracking a 1D single integrator.
RelativeSystem Quad10Axis(const QuadParams& q, const std::string& axis,
                          double vhat_max, double d_max) {
  RelativeSystem rel;
  rel.name = "quad10d_int3d/" + axis;
  rel.tracking = QuadAxisTracking(q, axis, d_max);
  rel.planning = SingleIntegrator("integrator", {axis + "hat"}, vhat_max);
  rel.q = MatchMatrix(4, 1, {{0, 0}});
  rel.error_dims = {0};
  rel.aux_dims = {1, 2, 3};
  rel.periodic.assign(4, false);
  rel.error = ErrorFunction::SumOfSquares({0});
  rel.affine = [q](std::span<const double> r, AffineTerms& t) {
    AxisTerms(q, r, 0, 0, t);
    t.B_p(0, 0) = -1.0;
  };
  rel.performance = [q](std::span<const double> r,
                        std::span<const double> u_hat, double w,
                        std::span<double> u) {
    const double vhat = u_hat.empty() ? 0.0 : u_hat[0];
    u[0] = AxisPerformance(q, r[0], r[1] - vhat, 0.0, w);
  };
  rel.domain = AxisDomain(1.5, 3.0);
  rel.default_nodes = {61, 61, 41, 41};
  return rel;
}

RelativeSystem Quad10Vertical(const QuadParams& q, double uz_min,
                              double uz_max, double vhat_max, double d_max) {
  RelativeSystem rel;
  rel.name = "quad10d_int3d/z";
  TrackingModel& tr = rel.tracking;
  tr.name = "quad2d_z";
  tr.state_names = {"z", "vz"};
  tr.control = Box({uz_min}, {uz_max});
  tr.disturbance = Box::Symmetric(1, d_max);
  tr.affine = [q](std::span<const double> s, AffineTerms& t) {
    VerticalTerms(q, s, 0, 0, t);
  };
  rel.planning = SingleIntegrator("integrator", {"zhat"}, vhat_max);
  rel.q = MatchMatrix(2, 1, {{0, 0}});
  rel.error_dims = {0};
  rel.aux_dims = {1};
  rel.periodic = {false, false};
  rel.error = ErrorFunction::SumOfSquares({0});
  rel.affine = [q](std::span<const double> r, AffineTerms& t) {
    VerticalTerms(q, r, 0, 0, t);
    t.B_p(0, 0) = -1.0;
  };
  rel.performance = [q](std::span<const double> r,
                        std::span<const double> u_hat, double w,
                        std::span<double> u) {
    const double vhat = u_hat.empty() ? 0.0 : u_hat[0];
    u[0] = (q.g - w * w * r[0] - 2.0 * w * (r[1] - vhat)) / q.kT;
  };
  rel.domain = Box({-1.0, -2.0}, {1.0, 2.0});
  rel.default_nodes = {101, 101};
  return rel;
}

ModelInstance BuildQuad10(const Params& p) {
  const QuadParams q = ReadQuad(p);
  const double uz_min = p.at("uz_min");
  const double uz_max = p.at("uz_max");
  const double vhat_max = p.at("vhat_max");
  const double d_max = p.at("d_max");

  RelativeSystem rel;
  rel.name = "quad10d_int3d";
  TrackingModel& tr = rel.tracking;
  tr.name = "quad10d";
  for (const char* a : {"x", "y"}) {
    for (const auto& n : AxisNames(a)) tr.state_names.push_back(n);
  }
  tr.state_names.push_back("z");
  tr.state_names.push_back("vz");
  tr.control = Box({-q.uxy_max, -q.uxy_max, uz_min},
                   {q.uxy_max, q.uxy_max, uz_max});
  tr.disturbance = Box::Symmetric(3, d_max);
  tr.affine = [q](std::span<const double> s, AffineTerms& t) {
    AxisTerms(q, s, 0, 0, t);
    AxisTerms(q, s, 4, 1, t);
    VerticalTerms(q, s, 8, 2, t);
  };
  rel.planning =
      SingleIntegrator("integrator3d", {"xhat", "yhat", "zhat"}, vhat_max);
  rel.q = MatchMatrix(10, 3, {{0, 0}, {4, 1}, {8, 2}});
  rel.error_dims = {0, 4, 8};
  rel.aux_dims = {1, 2, 3, 5, 6, 7, 9};
  rel.periodic.assign(10, false);
  rel.error = ErrorFunction::MaxOfSquares({0, 4, 8});
  rel.affine = [q](std::span<const double> r, AffineTerms& t) {
    AxisTerms(q, r, 0, 0, t);
    AxisTerms(q, r, 4, 1, t);
    VerticalTerms(q, r, 8, 2, t);
    t.B_p(0, 0) = -1.0;
    t.B_p(4, 1) = -1.0;
    t.B_p(8, 2) = -1.0;
  };
  rel.performance = [q](std::span<const double> r,
                        std::span<const double> u_hat, double w,
                        std::span<double> u) {
    const double vx = u_hat.empty() ? 0.0 : u_hat[0];
    const double vy = u_hat.empty() ? 0.0 : u_hat[1];
    const double vz = u_hat.empty() ? 0.0 : u_hat[2];
    u[0] = AxisPerformance(q, r[0], r[1] - vx, 0.0, w);
    u[1] = AxisPerformance(q, r[4], r[5] - vy, 0.0, w);
    u[2] = (q.g - w * w * r[8] - 2.0 * w * (r[9] - vz)) / q.kT;
  };

  ModelInstance m;
  const RelativeSystem x = Quad10Axis(q, "x", vhat_max, d_max);
  const RelativeSystem y = Quad10Axis(q, "y", vhat_max, d_max);
  const RelativeSystem z = Quad10Vertical(q, uz_min, uz_max, vhat_max, d_max);
  rel.domain = Concat({x.domain, y.domain, z.domain});
  rel.default_nodes = x.default_nodes;
  rel.default_nodes.insert(rel.default_nodes.end(), y.default_nodes.begin(),
                           y.default_nodes.end());
  rel.default_nodes.insert(rel.default_nodes.end(), z.default_nodes.begin(),
                           z.default_nodes.end());
  m.system = std::move(rel);
  m.subsystems.push_back({"x", x, {0, 1, 2, 3}, {0}, {0}, {0}});
  m.subsystems.push_back({"y", y, {4, 5, 6, 7}, {1}, {1}, {1}});
  m.subsystems.push_back({"z", z, {8, 9}, {2}, {2}, {2}});
  return m;
}

// 4D axis of the 8D quadrotor tracking a 1D double integrator. The error
// function covers position and velocity error with weight `c` on velocity.
RelativeSystem Quad8Axis(const QuadParams& q, const std::string& axis,
                         double ahat_max, double d_max, double c) {
  RelativeSystem rel;
  rel.name = "quad8d_int4d/" + axis;
  rel.tracking = QuadAxisTracking(q, axis, d_max);
  PlanningModel& pl = rel.planning;
  pl.name = "double_integrator";
  pl.state_names = {axis + "hat", "v" + axis + "hat"};
  pl.control = Box::Symmetric(1, ahat_max);
  pl.affine = [](std::span<const double> s, AffineTerms& t) {
    t.drift[0] = s[1];
    t.B_u(1, 0) = 1.0;
  };
  pl.position_dims = {0};
  pl.velocity_dims = {1};
  rel.q = MatchMatrix(4, 2, {{0, 0}, {1, 1}});
  rel.error_dims = {0, 1};
  rel.aux_dims = {2, 3};
  rel.periodic.assign(4, false);
  rel.error = ErrorFunction::SumOfSquares({0, 1}, {1.0, c});
  rel.affine = [q](std::span<const double> r, AffineTerms& t) {
    AxisTerms(q, r, 0, 0, t);
    t.B_p(1, 0) = -1.0;
  };
  rel.performance = [q](std::span<const double> r,
                        std::span<const double> u_hat, double w,
                        std::span<double> u) {
    const double ahat = u_hat.empty() ? 0.0 : u_hat[0];
    u[0] = AxisPerformance(q, r[0], r[1], ahat, w);
  };
  rel.domain = AxisDomain(2.0, 2.0);
  rel.default_nodes = {81, 81, 65, 65};
  return rel;
}

ModelInstance BuildQuad8(const Params& p) {
  const QuadParams q = ReadQuad(p);
  const double ahat_max = p.at("ahat_max");
  const double d_max = p.at("d_max");
  const double c = p.at("vel_weight");
  if (c < 0) {
    throw Error(ErrorCode::kInvalidArgument, "vel_weight must be >= 0");
  }

  RelativeSystem rel;
  rel.name = "quad8d_int4d";
  TrackingModel& tr = rel.tracking;
  tr.name = "quad8d";
  for (const char* a : {"x", "y"}) {
    for (const auto& n : AxisNames(a)) tr.state_names.push_back(n);
  }
  tr.control = Box::Symmetric(2, q.uxy_max);
  tr.disturbance = Box::Symmetric(2, d_max);
  tr.affine = [q](std::span<const double> s, AffineTerms& t) {
    AxisTerms(q, s, 0, 0, t);
    AxisTerms(q, s, 4, 1, t);
  };
  PlanningModel& pl = rel.planning;
  pl.name = "double_integrator2d";
  pl.state_names = {"xhat", "vxhat", "yhat", "vyhat"};
  pl.control = Box::Symmetric(2, ahat_max);
  pl.affine = [](std::span<const double> s, AffineTerms& t) {
    t.drift[0] = s[1];
    t.drift[2] = s[3];
    t.B_u(1, 0) = 1.0;
    t.B_u(3, 1) = 1.0;
  };
  pl.position_dims = {0, 2};
  pl.velocity_dims = {1, 3};
  rel.q = MatchMatrix(8, 4, {{0, 0}, {1, 1}, {4, 2}, {5, 3}});
  rel.error_dims = {0, 1, 4, 5};
  rel.aux_dims = {2, 3, 6, 7};
  rel.periodic.assign(8, false);
  rel.error = ErrorFunction(
      {ErrorTerm{{0, 1}, {1.0, c}}, ErrorTerm{{4, 5}, {1.0, c}}});
  rel.affine = [q](std::span<const double> r, AffineTerms& t) {
    AxisTerms(q, r, 0, 0, t);
    AxisTerms(q, r, 4, 1, t);
    t.B_p(1, 0) = -1.0;
    t.B_p(5, 1) = -1.0;
  };
  rel.performance = [q](std::span<const double> r,
                        std::span<const double> u_hat, double w,
                        std::span<double> u) {
    const double ax = u_hat.empty() ? 0.0 : u_hat[0];
    const double ay = u_hat.empty() ? 0.0 : u_hat[1];
    u[0] = AxisPerformance(q, r[0], r[1], ax, w);
    u[1] = AxisPerformance(q, r[4], r[5], ay, w);
  };

  ModelInstance m;
  const RelativeSystem x = Quad8Axis(q, "x", ahat_max, d_max, c);
  const RelativeSystem y = Quad8Axis(q, "y", ahat_max, d_max, c);
  rel.domain = Concat({x.domain, y.domain});
  rel.default_nodes = x.default_nodes;
  rel.default_nodes.insert(rel.default_nodes.end(), y.default_nodes.begin(),
                           y.default_nodes.end());
  m.system = std::move(rel);
  m.subsystems.push_back({"x", x, {0, 1, 2, 3}, {0}, {0}, {0}});
  m.subsystems.push_back({"y", y, {4, 5, 6, 7}, {1}, {1}, {1}});
  return m;
}

}  // namespace

const std::vector<std::string>& CatalogNames() {
  static const std::vector<std::string> kNames = {
      "rel1d", "dint2d", "car5d_car3d", "quad10d_int3d", "quad8d_int4d"};
  return kNames;
}

std::map<std::string, double> DefaultParams(const std::string& name) {
  constexpr double kG = 9.81;
  if (name == "rel1d") {
    return {{"u_max", 1.0}, {"uhat_max", 0.5}, {"d_max", 0.2}, {"dims", 1.0}};
  }
  if (name == "dint2d") {
    return {{"u_max", 1.0}, {"uhat_max", 0.5}, {"d_max", 0.1}};
  }
  if (name == "car5d_car3d") {
    return {{"a_max", 0.5},       {"alpha_max", 6.0}, {"dx_max", 0.02},
            {"dy_max", 0.02},     {"da_max", 0.2},    {"dalpha_max", 0.02},
            {"vhat", 0.1},        {"omegahat_max", 1.5}};
  }
  if (name == "quad10d_int3d") {
    return {{"d0", 10.0},        {"d1", 8.0},
            {"n0", 10.0},        {"kT", 0.91},
            {"g", kG},           {"u_xy_max", std::numbers::pi / 9.0},
            {"uz_min", 0.0},     {"uz_max", 1.5 * kG},
            {"vhat_max", 0.5},   {"d_max", 0.1}};
  }
  if (name == "quad8d_int4d") {
    return {{"d0", 10.0},       {"d1", 8.0},
            {"n0", 10.0},       {"kT", 0.91},
            {"g", kG},          {"u_xy_max", std::numbers::pi / 9.0},
            {"ahat_max", 1.0},  {"d_max", 0.2},
            {"vel_weight", 1.0}};
  }
  throw Error(ErrorCode::kNotFound, "unknown model '" + name + "'");
}

ModelInstance make_model(const std::string& name,
                         const std::map<std::string, double>& overrides) {
  Params params = DefaultParams(name);
  for (const auto& [key, value] : overrides) {
    if (!params.contains(key)) {
      throw Error(ErrorCode::kInvalidArgument,
                  name + ": unknown parameter '" + key + "'");
    }
    if (!std::isfinite(value)) {
      throw Error(ErrorCode::kInvalidArgument,
                  name + ": parameter '" + key + "' is not finite");
    }
    params[key] = value;
  }
  // Thrust ceiling follows gravity unless set explicitly.
  if (name == "quad10d_int3d" && !overrides.contains("uz_max")) {
    params["uz_max"] = 1.5 * params["g"];
  }

  ModelInstance m;
  if (name == "rel1d") {
    m = BuildRel1d(params);
  } else if (name == "dint2d") {
    m = BuildDint2d(params);
  } else if (name == "car5d_car3d") {
    m = BuildCar(params);
  } else if (name == "quad10d_int3d") {
    m = BuildQuad10(params);
  } else {
    m = BuildQuad8(params);
  }
  m.name = name;
  m.params = std::move(params);
  m.system.Validate();
  for (const Subsystem& s : m.subsystems) s.system.Validate();
  return m;
}

}  // namespace fastrack
