#pragma once

// Cone fusion: a track-by-detection linear Kalman filter whose measurement is
// the projection of the current estimate onto each new cone, plus the batch
// least-squares initializer that seeds it.

#include "cswarm/geometry.hpp"

#include <span>
#include <stdexcept>
#include <vector>

namespace cswarm {

/// Source position estimate and its covariance (m^2).
struct Hypothesis {
  Vec3 x = Vec3::Zero();
  Mat3 P = Mat3::Identity();
};

struct FusionConfig {
  double rho = 4.0;                ///< m^2, variance along the projection axis
  double off_axis_factor = 1e4;    ///< variance multiplier across it
  double q = 0.1;                  ///< m^2, process noise added per correction
  double p0 = 400.0;               ///< m^2, initial covariance diagonal
  int M = 20;                      ///< cones needed before initialization

  void validate() const;
};

struct PseudoMeasurement {
  Vec3 z;
  Mat3 R;
};

struct Correction {
  Hypothesis h;
  bool applied = true; ///< false when the innovation covariance was singular
};

/// Identity dynamics: x is kept, P grows by q I.
Hypothesis lkf_predict(const Hypothesis& h, const FusionConfig& cfg);

/// Rotation matrix whose first column is `target` (unit): the minimal rotation
/// taking world x onto it, or a half turn about z for the antipodal case.
Mat3 rotation_from_x_axis(const Vec3& target);

/// Projects h.x onto the cone and builds a covariance that is tight (rho)
/// along the projection axis and loose (rho * off_axis_factor) across it.
PseudoMeasurement measurement_from_cone(const Hypothesis& h, const ComptonCone& cone,
                                        const FusionConfig& cfg);

/// Kalman update with H = I.
Correction lkf_correct(const Hypothesis& h, const Vec3& z, const Mat3& R);

/// predict + measurement_from_cone + correct.
Correction fuse_cone(const Hypothesis& h, const ComptonCone& cone, const FusionConfig& cfg);

/// Axis-aligned box.
struct Bounds3 {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();

  Vec3 clamp(const Vec3& p) const { return p.cwiseMax(lo).cwiseMin(hi); }
};

struct NllsConfig {
  int grid = 5;                  ///< G x G starts over the box footprint
  double start_height = 0.0;     ///< z of the starts (clamped into the box)
  int max_iterations = 100;
  double grad_tol = 1e-8;        ///< on the projected gradient, scaled by 1 + sqrt(cost)
  double step_tol = 1e-9;        ///< relative step size
  double initial_damping = 1e-3;

  void validate() const;
};

struct NllsResult {
  Vec3 x;
  double cost = 0.0;     ///< sum of squared surface distances at x
  int start_index = -1;
  int iterations = 0;
  int converged_starts = 0;
};

class InitializationFailed : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Sum of squared cone-surface distances.
double nlls_objective(std::span<const ComptonCone> cones, const Vec3& p);

/// Damped Gauss-Newton (Levenberg-Marquardt) from a grid of starts, iterates
/// projected onto `bounds`. Returns the lowest-cost converged optimum (ties go
/// to the lowest start index). Throws InitializationFailed when no start
/// converges; std::invalid_argument for fewer than 3 cones.
NllsResult init_hypothesis_nlls(std::span<const ComptonCone> cones, const Bounds3& bounds,
                                const NllsConfig& cfg);

} // namespace cswarm
