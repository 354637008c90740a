#include "fastrack/relsys.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "fastrack/error.h"

namespace fastrack {

void AffineTerms::Resize(std::size_t state_dim, std::size_t control_dim,
                         std::size_t planning_dim,
                         std::size_t disturbance_dim) {
  n = state_dim;
  n_control = control_dim;
  n_planning = planning_dim;
  n_disturbance = disturbance_dim;
  drift.assign(n, 0.0);
  control.assign(n * n_control, 0.0);
  planning.assign(n * n_planning, 0.0);
  disturbance.assign(n * n_disturbance, 0.0);
}

void AffineTerms::Reset() {
  std::fill(drift.begin(), drift.end(), 0.0);
  std::fill(control.begin(), control.end(), 0.0);
  std::fill(planning.begin(), planning.end(), 0.0);
  std::fill(disturbance.begin(), disturbance.end(), 0.0);
}

namespace {

void AddProduct(const std::vector<double>& m, std::size_t cols,
                std::span<const double> v, std::vector<double>& out) {
  if (v.empty() || cols == 0) return;
  for (std::size_t i = 0; i < out.size(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < cols; ++j) acc += m[i * cols + j] * v[j];
    out[i] += acc;
  }
}

void CheckInBox(const Box& box, std::span<const double> x, const char* what) {
  if (x.size() != box.dim()) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(what) + " has wrong dimension");
  }
  if (!box.Contains(x, 1e-12)) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(what) + " outside its admissible box");
  }
}

}  // namespace

std::vector<double> EvaluateAffine(const AffineFn& fn, std::size_t n,
                                   std::size_t n_control,
                                   std::size_t n_planning,
                                   std::size_t n_disturbance,
                                   std::span<const double> x,
                                   std::span<const double> u,
                                   std::span<const double> u_hat,
                                   std::span<const double> d) {
  AffineTerms terms;
  terms.Resize(n, n_control, n_planning, n_disturbance);
  fn(x, terms);
  std::vector<double> out = terms.drift;
  AddProduct(terms.control, n_control, u, out);
  AddProduct(terms.planning, n_planning, u_hat, out);
  AddProduct(terms.disturbance, n_disturbance, d, out);
  return out;
}

std::vector<double> TrackingModel::Flow(std::span<const double> s,
                                        std::span<const double> u,
                                        std::span<const double> d) const {
  if (s.size() != state_dim()) {
    throw Error(ErrorCode::kInvalidArgument, "tracking state dimension");
  }
  return EvaluateAffine(affine, state_dim(), control.dim(), 0,
                        disturbance.dim(), s, u, {}, d);
}

std::vector<double> PlanningModel::Flow(std::span<const double> p,
                                        std::span<const double> u_hat) const {
  if (p.size() != state_dim()) {
    throw Error(ErrorCode::kInvalidArgument, "planning state dimension");
  }
  return EvaluateAffine(affine, state_dim(), control.dim(), 0, 0, p, u_hat, {},
                        {});
}

ErrorFunction::ErrorFunction(std::vector<ErrorTerm> terms)
    : terms_(std::move(terms)) {
  for (ErrorTerm& t : terms_) {
    if (t.weights.empty()) t.weights.assign(t.dims.size(), 1.0);
    if (t.weights.size() != t.dims.size()) {
      throw Error(ErrorCode::kInvalidArgument, "error term weight count");
    }
    for (double w : t.weights) {
      if (!(w >= 0.0)) {
        throw Error(ErrorCode::kInvalidArgument, "negative error weight");
      }
    }
  }
}

ErrorFunction ErrorFunction::SumOfSquares(std::vector<std::size_t> dims,
                                          std::vector<double> weights) {
  return ErrorFunction({ErrorTerm{std::move(dims), std::move(weights)}});
}

ErrorFunction ErrorFunction::MaxOfSquares(std::vector<std::size_t> dims) {
  std::vector<ErrorTerm> terms;
  for (std::size_t d : dims) terms.push_back(ErrorTerm{{d}, {1.0}});
  return ErrorFunction(std::move(terms));
}

double ErrorFunction::operator()(std::span<const double> r) const {
  double best = 0.0;
  for (const ErrorTerm& t : terms_) {
    double acc = 0.0;
    for (std::size_t i = 0; i < t.dims.size(); ++i) {
      const double x = r[t.dims[i]];
      acc += t.weights[i] * x * x;
    }
    best = std::max(best, acc);
  }
  return best;
}

std::vector<std::size_t> ErrorFunction::dims() const {
  std::set<std::size_t> all;
  for (const ErrorTerm& t : terms_) all.insert(t.dims.begin(), t.dims.end());
  return {all.begin(), all.end()};
}

std::string ErrorFunction::id() const {
  std::ostringstream os;
  os.precision(17);
  os << "max(";
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    if (k) os << ",";
    for (std::size_t i = 0; i < terms_[k].dims.size(); ++i) {
      if (i) os << "+";
      os << terms_[k].weights[i] << "*r" << terms_[k].dims[i] << "^2";
    }
  }
  os << ")";
  return os.str();
}

std::vector<std::string> RelativeSystem::state_names() const {
  std::vector<std::string> names = tracking.state_names;
  for (std::size_t e : error_dims) names[e] += "_r";
  return names;
}

std::optional<std::size_t> RelativeSystem::MatchedPlanningDim(
    std::size_t row) const {
  for (std::size_t j = 0; j < q[row].size(); ++j) {
    if (q[row][j] == 1) return j;
  }
  return std::nullopt;
}

void RelativeSystem::Validate() const {
  const std::size_t n = dim();
  const std::size_t np = planning.state_dim();
  if (q.size() != n) {
    throw Error(ErrorCode::kInvalidArgument, name + ": Q row count");
  }
  for (const auto& row : q) {
    if (row.size() != np) {
      throw Error(ErrorCode::kInvalidArgument, name + ": Q column count");
    }
  }
  for (std::size_t j = 0; j < np; ++j) {
    int ones = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (q[i][j] != 0 && q[i][j] != 1) {
        throw Error(ErrorCode::kInvalidArgument, name + ": Q entry not 0/1");
      }
      ones += q[i][j];
    }
    if (ones != 1) {
      throw Error(ErrorCode::kInvalidArgument,
                  name + ": Q column without exactly one 1");
    }
  }
  std::vector<int> seen(n, 0);
  for (std::size_t e : error_dims) {
    if (e >= n) throw Error(ErrorCode::kInvalidArgument, "error dim range");
    ++seen[e];
  }
  for (std::size_t a : aux_dims) {
    if (a >= n) throw Error(ErrorCode::kInvalidArgument, "aux dim range");
    ++seen[a];
  }
  for (int c : seen) {
    if (c != 1) {
      throw Error(ErrorCode::kInvalidArgument,
                  name + ": error and auxiliary dims must partition r");
    }
  }
  if (!error_reads_aux) {
    for (std::size_t d : error.dims()) {
      if (std::find(error_dims.begin(), error_dims.end(), d) ==
          error_dims.end()) {
        throw Error(ErrorCode::kInvalidArgument,
                    name + ": error function reads an auxiliary state");
      }
    }
  }
  if (periodic.size() != n || domain.dim() != n ||
      default_nodes.size() != n) {
    throw Error(ErrorCode::kInvalidArgument, name + ": grid defaults size");
  }
}

double WrapAngle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double w = std::fmod(a + std::numbers::pi, kTwoPi);
  if (w < 0) w += kTwoPi;
  return w - std::numbers::pi;
}

std::vector<double> relative_state(std::span<const double> s,
                                   std::span<const double> p,
                                   const RelativeSystem& rel) {
  const std::size_t n = rel.dim();
  const std::size_t np = rel.planning.state_dim();
  if (s.size() != n || p.size() != np) {
    throw Error(ErrorCode::kInvalidArgument,
                "relative_state: dimension mismatch with " + rel.name);
  }
  std::vector<double> r(s.begin(), s.end());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < np; ++j) {
      if (rel.q[i][j]) r[i] -= p[j];
    }
  }
  if (rel.transform == Transform::kPlanarRotation) {
    const double th = p[rel.rotation_heading];
    const double c = std::cos(th);
    const double sn = std::sin(th);
    const double dx = r[rel.rotated_dims[0]];
    const double dy = r[rel.rotated_dims[1]];
    r[rel.rotated_dims[0]] = c * dx + sn * dy;
    r[rel.rotated_dims[1]] = -sn * dx + c * dy;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (rel.periodic[i]) r[i] = WrapAngle(r[i]);
  }
  return r;
}

std::vector<double> relative_flow(const RelativeSystem& rel,
                                  std::span<const double> r,
                                  std::span<const double> u,
                                  std::span<const double> u_hat,
                                  std::span<const double> d) {
  if (r.size() != rel.dim()) {
    throw Error(ErrorCode::kInvalidArgument, "relative state dimension");
  }
  CheckInBox(rel.tracking.control, u, "tracking control");
  CheckInBox(rel.planning.control, u_hat, "planning control");
  CheckInBox(rel.tracking.disturbance, d, "disturbance");
  return EvaluateAffine(rel.affine, rel.dim(), rel.tracking.control.dim(),
                        rel.planning.control.dim(),
                        rel.tracking.disturbance.dim(), r, u, u_hat, d);
}

std::vector<double> TrackingDisturbance(const RelativeSystem& rel,
                                        std::span<const double> p,
                                        std::span<const double> d_rel) {
  std::vector<double> d(d_rel.begin(), d_rel.end());
  if (rel.transform == Transform::kPlanarRotation) {
    const double th = p[rel.rotation_heading];
    const double c = std::cos(th);
    const double sn = std::sin(th);
    const double a = d_rel[rel.rotated_disturbance[0]];
    const double b = d_rel[rel.rotated_disturbance[1]];
    d[rel.rotated_disturbance[0]] = c * a - sn * b;
    d[rel.rotated_disturbance[1]] = sn * a + c * b;
  }
  return d;
}

std::vector<double> ProjectToPlanning(const RelativeSystem& rel,
                                      std::span<const double> s) {
  std::vector<double> p(rel.planning.state_dim(), 0.0);
  for (std::size_t i = 0; i < rel.dim(); ++i) {
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (rel.q[i][j]) p[j] = s[i];
    }
  }
  return p;
}

std::vector<double> TrackingPosition(const RelativeSystem& rel,
                                     std::span<const double> s) {
  std::vector<double> pos;
  for (std::size_t pd : rel.planning.position_dims) {
    for (std::size_t i = 0; i < rel.dim(); ++i) {
      if (rel.q[i][pd]) pos.push_back(s[i]);
    }
  }
  return pos;
}

}  // namespace fastrack
