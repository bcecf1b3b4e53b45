#include "doctest.h"
#include "oracles.hpp"

#include "cswarm/detector.hpp"
#include "cswarm/fusion.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

using namespace cswarm;

namespace {

// Noiseless cones seen from poses spread around `source` at radius 8..20 m.
std::vector<ComptonCone> encircling_cones(const Vec3& source, int n, std::uint64_t seed,
                                          double sigma = 0.0) {
  DetectorConfig cfg;
  cfg.angular_noise_sigma = sigma;
  Rng rng(seed);
  std::uniform_real_distribution<double> radius(8.0, 20.0);
  std::vector<ComptonCone> cones;
  for (int i = 0; i < n; ++i) {
    const double phi = kTwoPi * i / n;
    const Vec3 pos = source + Vec3(radius(rng) * std::cos(phi), radius(rng) * std::sin(phi), 4.0);
    cones.push_back(synthesize_cone(source, Pose::from_yaw(pos, phi + kPi), cfg, rng));
  }
  return cones;
}

double asymmetry(const Mat3& m) { return (m - m.transpose()).cwiseAbs().maxCoeff(); }

} // namespace

TEST_CASE("predict adds process noise only") {
  FusionConfig cfg;
  cfg.q = 0.5;
  const Hypothesis h{Vec3(1, 2, 3), Mat3::Identity()};
  const Hypothesis p = lkf_predict(h, cfg);
  CHECK(p.x == h.x);
  CHECK((p.P - 1.5 * Mat3::Identity()).norm() < 1e-15);
  cfg.q = 0.0;
  CHECK(lkf_predict(h, cfg).P == h.P);
}

TEST_CASE("rotation from the x axis") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const Vec3 t = oracle::random_unit(rng);
    const Mat3 Q = rotation_from_x_axis(t);
    CHECK((Q.col(0) - t).norm() < 1e-12);
    CHECK((Q.transpose() * Q - Mat3::Identity()).norm() < 1e-12);
    CHECK(Q.determinant() == doctest::Approx(1.0));
  }
  const Mat3 anti = rotation_from_x_axis(-Vec3::UnitX());
  CHECK((anti.col(0) + Vec3::UnitX()).norm() < 1e-12);
  CHECK(anti.determinant() == doctest::Approx(1.0));
  CHECK((rotation_from_x_axis(Vec3::UnitX()) - Mat3::Identity()).norm() < 1e-15);
}

TEST_CASE("measurement covariance along the world x axis") {
  FusionConfig cfg;
  cfg.rho = 1.0;
  // flat cone (the plane x = 0); a point at x = -2 projects along +x
  const ComptonCone plane{Vec3::Zero(), UnitVec3::normalize(Vec3::UnitX()), kPi / 2};
  const Hypothesis h{Vec3(-2, 1, 0.5), Mat3::Identity()};
  const PseudoMeasurement m = measurement_from_cone(h, plane, cfg);
  CHECK((m.z - Vec3(0, 1, 0.5)).norm() < 1e-12);
  Mat3 expected = Mat3::Zero();
  expected.diagonal() << 1.0, 1e4, 1e4;
  CHECK((m.R - expected).norm() < 1e-8);
}

TEST_CASE("measurement covariance structure on random cases") {
  FusionConfig cfg;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-10, 10);
  std::uniform_real_distribution<double> angle(0.2, 1.4);
  for (int i = 0; i < 1000; ++i) {
    const ComptonCone c{Vec3(u(rng), u(rng), u(rng)), UnitVec3::normalize(oracle::random_unit(rng)),
                        angle(rng)};
    const Hypothesis h{Vec3(u(rng), u(rng), u(rng)), Mat3::Identity()};
    const PseudoMeasurement m = measurement_from_cone(h, c, cfg);
    CHECK(asymmetry(m.R) < 1e-12 * m.R.norm());
    Eigen::SelfAdjointEigenSolver<Mat3> es(m.R);
    const auto ev = es.eigenvalues();
    CHECK(std::abs(ev[0] - cfg.rho) / cfg.rho < 1e-9);
    CHECK(std::abs(ev[1] - 1e4 * cfg.rho) / (1e4 * cfg.rho) < 1e-9);
    CHECK(std::abs(ev[2] - 1e4 * cfg.rho) / (1e4 * cfg.rho) < 1e-9);
    const Vec3 axis = m.z - h.x;
    if (axis.norm() > 1e-9)
      CHECK(std::abs(std::abs(es.eigenvectors().col(0).dot(axis.normalized())) - 1.0) < 1e-9);
  }
}

TEST_CASE("hypothesis on the surface aligns with the surface normal") {
  FusionConfig cfg;
  const ComptonCone c{Vec3::Zero(), UnitVec3::normalize(Vec3::UnitX()), kPi / 4};
  const Vec3 on = 3.0 * Vec3(std::cos(kPi / 4), std::sin(kPi / 4), 0);
  const PseudoMeasurement m = measurement_from_cone({on, Mat3::Identity()}, c, cfg);
  CHECK((m.z - on).norm() < 1e-12);
  Eigen::SelfAdjointEigenSolver<Mat3> es(m.R);
  const Vec3 normal = Vec3(-std::sin(kPi / 4), std::cos(kPi / 4), 0);
  CHECK(std::abs(std::abs(es.eigenvectors().col(0).dot(normal)) - 1.0) < 1e-9);
}

TEST_CASE("correction hand examples") {
  const Hypothesis h{Vec3::Zero(), Mat3::Identity()};
  const Correction c = lkf_correct(h, Vec3(2, 0, 0), Mat3::Identity());
  CHECK(c.applied);
  CHECK((c.h.x - Vec3(1, 0, 0)).norm() < 1e-12);
  CHECK((c.h.P - 0.5 * Mat3::Identity()).norm() < 1e-12);

  const Correction frozen = lkf_correct({Vec3(1, 1, 1), Mat3::Zero()}, Vec3(5, 5, 5),
                                        Mat3::Identity());
  CHECK(frozen.h.x == Vec3(1, 1, 1));

  const Correction sharp = lkf_correct(h, Vec3(3, -1, 2), 1e-12 * Mat3::Identity());
  CHECK((sharp.h.x - Vec3(3, -1, 2)).norm() < 1e-9);
}

TEST_CASE("singular innovation skips the correction") {
  const Hypothesis h{Vec3(1, 2, 3), Mat3::Zero()};
  const Correction c = lkf_correct(h, Vec3(0, 0, 0), Mat3::Zero());
  CHECK_FALSE(c.applied);
  CHECK(c.h.x == h.x);
}

TEST_CASE("fusing a cone through the estimate leaves it in place") {
  FusionConfig cfg;
  const ComptonCone c{Vec3::Zero(), UnitVec3::normalize(Vec3::UnitX()), kPi / 3};
  const Vec3 on = 5.0 * Vec3(std::cos(kPi / 3), 0, std::sin(kPi / 3));
  const Hypothesis h{on, 10 * Mat3::Identity()};
  const Correction out = fuse_cone(h, c, cfg);
  CHECK((out.h.x - on).norm() < 1e-9);
  const Vec3 normal(-std::sin(kPi / 3), 0, std::cos(kPi / 3));
  CHECK(normal.dot(out.h.P * normal) < 10.0 + cfg.q);
}

TEST_CASE("corrections move only along the projection axis") {
  FusionConfig cfg;
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int i = 0; i < 500; ++i) {
    const ComptonCone c{Vec3(u(rng), u(rng), 0), UnitVec3::normalize(oracle::random_unit(rng)), 0.7};
    const Hypothesis h{Vec3(u(rng), u(rng), u(rng)), 50 * Mat3::Identity()};
    const PseudoMeasurement m = measurement_from_cone(lkf_predict(h, cfg), c, cfg);
    const Vec3 axis = m.z - h.x;
    if (axis.norm() < 1e-6)
      continue;
    const Vec3 step = fuse_cone(h, c, cfg).h.x - h.x;
    CHECK(step.cross(axis).norm() <= 1e-6 * step.norm() * axis.norm() + 1e-12);
  }
}

TEST_CASE("covariance stays symmetric and PSD over long sequences") {
  FusionConfig cfg;
  const Vec3 source(10, -5, 0);
  const auto cones = encircling_cones(source, 400, 77, 0.05);
  Hypothesis h{Vec3::Zero(), cfg.p0 * Mat3::Identity()};
  for (const auto& c : cones) {
    h = fuse_cone(h, c, cfg).h;
    CHECK(asymmetry(h.P) < 1e-10);
    Eigen::SelfAdjointEigenSolver<Mat3> es(h.P);
    CHECK(es.eigenvalues().minCoeff() > -1e-9);
  }
}

TEST_CASE("fusion is bitwise deterministic") {
  FusionConfig cfg;
  const auto cones = encircling_cones(Vec3(3, 4, 0), 50, 1, 0.05);
  Hypothesis a{Vec3::Zero(), 400 * Mat3::Identity()}, b = a;
  for (const auto& c : cones) {
    a = fuse_cone(a, c, cfg).h;
    b = fuse_cone(b, c, cfg).h;
  }
  CHECK(a.x == b.x);
  CHECK(a.P == b.P);
}

TEST_CASE("fusing encircling noiseless cones converges") {
  FusionConfig cfg;
  const Vec3 source(10, -5, 0);
  const auto cones = encircling_cones(source, 200, 5);
  Hypothesis h{Vec3::Zero(), cfg.p0 * Mat3::Identity()};
  for (const auto& c : cones)
    h = fuse_cone(h, c, cfg).h;
  CHECK((h.x - source).norm() < 0.5);
}

TEST_CASE("cones from a single pose do not localize") {
  FusionConfig cfg;
  DetectorConfig det;
  det.angular_noise_sigma = 0.0;
  Rng rng(4);
  const Vec3 source(10, -5, 0);
  const Pose pose = Pose::from_yaw(Vec3(-10, 0, 4), 0.0);
  Hypothesis h{Vec3(0, 10, 0), cfg.p0 * Mat3::Identity()};
  for (int i = 0; i < 200; ++i)
    h = fuse_cone(h, synthesize_cone(source, pose, det, rng), cfg).h;
  // only the bearing is observable: the estimate sits on the bearing line
  const Vec3 bearing = (source - pose.position).normalized();
  const Vec3 rel = h.x - pose.position;
  CHECK((rel - rel.dot(bearing) * bearing).norm() < 1.0);
  CHECK(h.x.allFinite());
}

TEST_CASE("NLLS objective") {
  const Vec3 source(30, 40, 0);
  const auto cones = encircling_cones(source, 20, 3);
  CHECK(nlls_objective(cones, source) < 1e-18);
  CHECK(nlls_objective(cones, Vec3(0, 0, 0)) > 0.0);
}

TEST_CASE("NLLS recovers a source from twenty noiseless cones") {
  const Vec3 source(30, 40, 0);
  DetectorConfig det;
  det.angular_noise_sigma = 0.0;
  Rng rng(99);
  std::uniform_real_distribution<double> u(0, 100);
  std::vector<ComptonCone> cones;
  for (int i = 0; i < 20; ++i) {
    const Vec3 pos(u(rng), u(rng), 4.0);
    const double yaw = std::atan2(source.y() - pos.y(), source.x() - pos.x());
    cones.push_back(synthesize_cone(source, Pose::from_yaw(pos, yaw), det, rng));
  }
  const Bounds3 bounds{Vec3(0, 0, 0), Vec3(100, 100, 0)};
  const NllsResult r = init_hypothesis_nlls(cones, bounds, NllsConfig{});
  CHECK((r.x - source).norm() < 0.5);
  CHECK(r.cost <= nlls_objective(cones, source) + 1e-6);
  CHECK(r.x.z() == 0.0);
  CHECK(r.start_index >= 0);
  CHECK(r.start_index < 25);
}

TEST_CASE("NLLS with angular noise stays within five meters in median") {
  const Bounds3 bounds{Vec3(0, 0, 0), Vec3(100, 100, 0)};
  std::vector<double> errors;
  for (int seed = 0; seed < 50; ++seed) {
    Rng rng(500 + seed);
    std::uniform_real_distribution<double> u(10, 90);
    const Vec3 source(u(rng), u(rng), 0);
    const auto cones = encircling_cones(source, 20, 600 + seed, 0.05);
    errors.push_back((init_hypothesis_nlls(cones, bounds, NllsConfig{}).x - source).norm());
  }
  std::nth_element(errors.begin(), errors.begin() + 25, errors.end());
  CHECK(errors[25] < 5.0);
}

TEST_CASE("NLLS input checks") {
  const auto cones = encircling_cones(Vec3(1, 1, 0), 2, 1);
  CHECK_THROWS_AS(init_hypothesis_nlls(cones, Bounds3{}, NllsConfig{}), std::invalid_argument);
}

TEST_CASE("NLLS without enough iterations fails to initialize") {
  const auto cones = encircling_cones(Vec3(30, 40, 0), 20, 3, 0.05);
  NllsConfig cfg;
  cfg.max_iterations = 1;
  cfg.grad_tol = 1e-300;
  cfg.step_tol = 1e-300;
  const Bounds3 bounds{Vec3(0, 0, 0), Vec3(100, 100, 0)};
  CHECK_THROWS_AS(init_hypothesis_nlls(cones, bounds, cfg), InitializationFailed);
}

TEST_CASE("fusion config validation") {
  FusionConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.M = 2;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = FusionConfig{};
  cfg.rho = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
