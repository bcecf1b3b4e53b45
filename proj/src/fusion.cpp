#include "cswarm/fusion.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cswarm {

void FusionConfig::validate() const {
  auto require = [](bool ok, const char* field, const char* what) {
    if (!ok)
      throw std::invalid_argument(std::string("fusion.") + field + ": " + what);
  };
  require(rho > 0.0, "rho", "must be > 0");
  require(off_axis_factor >= 1.0, "off_axis_factor", "must be >= 1");
  require(q >= 0.0, "q", "must be >= 0");
  require(p0 > 0.0, "p0", "must be > 0");
  require(M >= 3, "M", "must be >= 3");
}

void NllsConfig::validate() const {
  auto require = [](bool ok, const char* field, const char* what) {
    if (!ok)
      throw std::invalid_argument(std::string("nlls.") + field + ": " + what);
  };
  require(grid >= 1, "grid", "must be >= 1");
  require(max_iterations >= 1, "max_iterations", "must be >= 1");
  require(grad_tol > 0.0, "grad_tol", "must be > 0");
  require(step_tol > 0.0, "step_tol", "must be > 0");
  require(initial_damping > 0.0, "initial_damping", "must be > 0");
}

Hypothesis lkf_predict(const Hypothesis& h, const FusionConfig& cfg) {
  Hypothesis out = h;
  out.P += cfg.q * Mat3::Identity();
  return out;
}

Mat3 rotation_from_x_axis(const Vec3& target) {
  const Vec3 x = Vec3::UnitX();
  const Vec3 t = target.normalized();
  const Vec3 k = x.cross(t);
  const double s = k.norm();
  const double c = x.dot(t);
  if (s < 1e-12) {
    if (c > 0.0)
      return Mat3::Identity();
    return Eigen::AngleAxisd(kPi, Vec3::UnitZ()).toRotationMatrix();
  }
  return Eigen::AngleAxisd(std::atan2(s, c), k / s).toRotationMatrix();
}

namespace {

// Outward surface normal of the cone at (or nearest to) `point`; the axis when
// the point is at the apex.
Vec3 surface_normal(const ComptonCone& cone, const Vec3& point) {
  const Vec3& u = cone.axis.vec();
  const Vec3 offset = point - cone.apex;
  if (offset.norm() < 1e-12)
    return u;
  const Vec3 perp = offset - offset.dot(u) * u;
  const Vec3 radial = perp.norm() > 1e-12 * offset.norm() ? Vec3(perp.normalized())
                                                          : any_perpendicular(u);
  return (std::cos(cone.half_angle) * radial - std::sin(cone.half_angle) * u).normalized();
}

} // namespace

PseudoMeasurement measurement_from_cone(const Hypothesis& h, const ComptonCone& cone,
                                        const FusionConfig& cfg) {
  PseudoMeasurement m;
  m.z = project_point_onto_cone(cone, h.x);
  const Vec3 step = m.z - h.x;
  const double len = step.norm();
  const Vec3 axis = len > 1e-12 * (1.0 + h.x.norm()) ? Vec3(step / len)
                                                     : surface_normal(cone, m.z);
  const Mat3 Q = rotation_from_x_axis(axis);
  const Vec3 diag(cfg.rho, cfg.rho * cfg.off_axis_factor, cfg.rho * cfg.off_axis_factor);
  m.R = Q * diag.asDiagonal() * Q.transpose();
  m.R = 0.5 * (m.R + m.R.transpose());
  return m;
}

Correction lkf_correct(const Hypothesis& h, const Vec3& z, const Mat3& R) {
  const Mat3 S = h.P + R;
  Eigen::LDLT<Mat3> ldlt(S);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    return {h, false};
  const Vec3 d = ldlt.vectorD();
  const double dmax = d.cwiseAbs().maxCoeff();
  if (!(dmax > 0.0) || d.minCoeff() <= dmax * 1e-14 || !std::isfinite(dmax))
    return {h, false};

  // K = P S^-1, computed as (S^-1 P)^T since both are symmetric
  const Mat3 K = ldlt.solve(h.P).transpose();
  Correction out;
  out.h.x = h.x + K * (z - h.x);
  const Mat3 P = (Mat3::Identity() - K) * h.P;
  out.h.P = 0.5 * (P + P.transpose());
  return out;
}

Correction fuse_cone(const Hypothesis& h, const ComptonCone& cone, const FusionConfig& cfg) {
  const Hypothesis predicted = lkf_predict(h, cfg);
  const PseudoMeasurement m = measurement_from_cone(predicted, cone, cfg);
  Correction c = lkf_correct(predicted, m.z, m.R);
  if (!c.applied)
    c.h = predicted;
  return c;
}

double nlls_objective(std::span<const ComptonCone> cones, const Vec3& p) {
  double cost = 0.0;
  for (const auto& cone : cones) {
    const double d = point_cone_surface_distance(cone, p);
    cost += d * d;
  }
  return cost;
}

namespace {

struct Normal {
  Mat3 JtJ = Mat3::Zero();
  Vec3 g = Vec3::Zero();
};

// Residual r_i = distance to cone i, with gradient (p - proj_i) / r_i.
Normal normal_equations(std::span<const ComptonCone> cones, const Vec3& p) {
  Normal n;
  for (const auto& cone : cones) {
    const Vec3 diff = p - project_point_onto_cone(cone, p);
    const double r = diff.norm();
    if (r < 1e-15)
      continue;
    const Vec3 J = diff / r;
    n.JtJ += J * J.transpose();
    n.g += J * r;
  }
  return n;
}

// Zero the gradient components that point out of the box at an active bound.
Vec3 projected_gradient(const Vec3& g, const Vec3& p, const Bounds3& b) {
  Vec3 out = g;
  for (int i = 0; i < 3; ++i) {
    const bool at_lo = p[i] <= b.lo[i];
    const bool at_hi = p[i] >= b.hi[i];
    if ((at_lo && g[i] > 0.0) || (at_hi && g[i] < 0.0) || (at_lo && at_hi))
      out[i] = 0.0;
  }
  return out;
}

struct LocalResult {
  Vec3 x;
  double cost;
  int iterations;
  bool converged;
};

LocalResult levenberg_marquardt(std::span<const ComptonCone> cones, Vec3 p, const Bounds3& b,
                                const NllsConfig& cfg) {
  double cost = nlls_objective(cones, p);
  double damping = cfg.initial_damping;
  constexpr double kMaxDamping = 1e12;

  for (int it = 0; it < cfg.max_iterations; ++it) {
    const Normal n = normal_equations(cones, p);
    const Vec3 pg = projected_gradient(n.g, p, b);
    if (pg.norm() <= cfg.grad_tol * (1.0 + std::sqrt(cost)))
      return {p, cost, it, true};

    bool accepted = false;
    while (!accepted) {
      Mat3 A = n.JtJ;
      for (int i = 0; i < 3; ++i)
        A(i, i) += damping * std::max(n.JtJ(i, i), 1e-9);
      const Vec3 delta = A.ldlt().solve(-n.g);
      const Vec3 candidate = b.clamp(p + delta);
      const double candidate_cost = nlls_objective(cones, candidate);
      if (candidate_cost < cost) {
        const double step = (candidate - p).norm();
        p = candidate;
        cost = candidate_cost;
        damping = std::max(damping * 0.1, 1e-12);
        accepted = true;
        if (step <= cfg.step_tol * (1.0 + p.norm()))
          return {p, cost, it + 1, true};
      } else {
        damping *= 10.0;
        // no descent direction left at this resolution: a kink or a bound
        if (damping > kMaxDamping)
          return {p, cost, it + 1, true};
      }
    }
  }
  return {p, cost, cfg.max_iterations, false};
}

} // namespace

NllsResult init_hypothesis_nlls(std::span<const ComptonCone> cones, const Bounds3& bounds,
                                const NllsConfig& cfg) {
  if (cones.size() < 3)
    throw std::invalid_argument("init_hypothesis_nlls: need at least 3 cones");
  cfg.validate();

  NllsResult best;
  best.cost = std::numeric_limits<double>::infinity();
  const int G = cfg.grid;
  const Vec3 extent = bounds.hi - bounds.lo;
  for (int iy = 0; iy < G; ++iy) {
    for (int ix = 0; ix < G; ++ix) {
      const int index = iy * G + ix;
      const Vec3 start = bounds.clamp(Vec3(bounds.lo.x() + (ix + 0.5) / G * extent.x(),
                                           bounds.lo.y() + (iy + 0.5) / G * extent.y(),
                                           cfg.start_height));
      const LocalResult local = levenberg_marquardt(cones, start, bounds, cfg);
      if (!local.converged)
        continue;
      ++best.converged_starts;
      if (local.cost < best.cost) {
        best.x = local.x;
        best.cost = local.cost;
        best.start_index = index;
        best.iterations = local.iterations;
      }
    }
  }
  if (best.converged_starts == 0)
    throw InitializationFailed("no least-squares start converged within " +
                               std::to_string(cfg.max_iterations) + " iterations");
  best.x = bounds.clamp(best.x);
  return best;
}

} // namespace cswarm
