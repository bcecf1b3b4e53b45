#pragma once

// Independent reference computations shared by the unit and acceptance tests.
// None of these call into the library's geometry code.

#include "cswarm/geometry.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace oracle {

using cswarm::Vec3;

inline constexpr double kRestKeV = 510.998950;

// Scattered photon energy, written directly from the Compton formula.
inline double scattered_energy(double e_initial, double theta) {
  return e_initial / (1.0 + e_initial / kRestKeV * (1.0 - std::cos(theta)));
}

// Orthonormal pair perpendicular to `axis` (Gram-Schmidt against a fixed seed).
inline void basis(const Vec3& axis, Vec3& e1, Vec3& e2) {
  const Vec3 seed = std::abs(axis.z()) < 0.9 ? Vec3(0, 0, 1) : Vec3(1, 0, 0);
  e1 = (seed - seed.dot(axis) * axis).normalized();
  e2 = axis.cross(e1);
}

// Smallest distance from `p` to a uniform polar grid of cone surface samples:
// n_phi generators, each sampled at n_s arc positions up to s_max, plus the
// apex. Refined once around the best sample.
inline double brute_force_surface_distance(const Vec3& apex, const Vec3& axis, double half_angle,
                                           const Vec3& p, int n_phi, int n_s, double s_max) {
  Vec3 e1, e2;
  basis(axis, e1, e2);
  auto point = [&](double phi, double s) -> Vec3 {
    const Vec3 dir = std::cos(half_angle) * axis +
                     std::sin(half_angle) * (std::cos(phi) * e1 + std::sin(phi) * e2);
    return apex + s * dir;
  };
  double best = (p - apex).norm();
  double best_phi = 0.0, best_s = 0.0;
  const double two_pi = 2.0 * M_PI;
  for (int i = 0; i < n_phi; ++i) {
    const double phi = two_pi * i / n_phi;
    for (int j = 1; j <= n_s; ++j) {
      const double s = s_max * j / n_s;
      const double d = (point(phi, s) - p).norm();
      if (d < best) {
        best = d;
        best_phi = phi;
        best_s = s;
      }
    }
  }
  // local refinement on a finer grid around the coarse optimum
  const double dphi = two_pi / n_phi, ds = s_max / n_s;
  for (int i = -20; i <= 20; ++i)
    for (int j = -20; j <= 20; ++j) {
      const double s = best_s + ds * j / 20.0;
      if (s < 0.0)
        continue;
      best = std::min(best, (point(best_phi + dphi * i / 20.0, s) - p).norm());
    }
  return best;
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v;
  do {
    v = Vec3(n(rng), n(rng), n(rng));
  } while (v.norm() < 1e-6);
  return v.normalized();
}

} // namespace oracle
