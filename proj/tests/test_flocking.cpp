#include "doctest.h"

#include "cswarm/flocking.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace cswarm;

TEST_CASE("nearest neighbor angle") {
  const PolarPos self{12, 0};
  const std::vector<PolarPos> a{{12, kPi / 4}, {12, kPi}};
  CHECK(nearest_neighbor_angle(self, a) == doctest::Approx(kPi / 4));
  const std::vector<PolarPos> tie{{12, -kPi / 4}, {12, kPi / 4}};
  CHECK(nearest_neighbor_angle(self, tie) == doctest::Approx(-kPi / 4));
  const std::vector<PolarPos> tie_swapped{{12, kPi / 4}, {12, -kPi / 4}};
  CHECK(nearest_neighbor_angle(self, tie_swapped) == doctest::Approx(kPi / 4));
  const std::vector<PolarPos> radii{{3, kPi / 4}, {40, kPi}};
  CHECK(nearest_neighbor_angle(self, radii) == nearest_neighbor_angle(self, a));
  const std::vector<PolarPos> wrap{{12, kTwoPi - 0.1}};
  CHECK(nearest_neighbor_angle({12, 0.1}, wrap) == doctest::Approx(-0.2));
}

TEST_CASE("bias angle") {
  FlockConfig cfg;
  cfg.n_agents = 2;
  CHECK(bias_angle(kPi, cfg) == 0.0);
  CHECK(bias_angle(kPi / 4, cfg) == doctest::Approx(-0.225).epsilon(1e-12));
  CHECK(bias_angle(-kPi / 4, cfg) == doctest::Approx(0.225).epsilon(1e-12));
  // inside the deadband
  CHECK(bias_angle(kPi - 0.01, cfg) == 0.0);
  // magnitude never exceeds beta_max
  for (double t = -kPi; t <= kPi; t += 0.01)
    CHECK(std::abs(bias_angle(t, cfg)) <= cfg.beta_max + 1e-15);
  cfg.n_agents = 3;
  for (double t = 0.05; t < kPi; t += 0.1)
    CHECK(bias_angle(-t, cfg) == -bias_angle(t, cfg));
}

TEST_CASE("encirclement trajectory geometry") {
  FlockConfig cfg;
  const Vec3 hyp(50, 50, 0);
  const Vec3 self(60, 50, 4);
  const Trajectory traj = generate_encirclement_trajectory(self, hyp, 0.0, cfg);
  REQUIRE(traj.size() == static_cast<size_t>(cfg.K + 1));
  CHECK((traj[0].position - Vec3(62, 50, 4)).norm() < 1e-12);
  const double step = cfg.v / cfg.r * cfg.dt;
  CHECK(step == doctest::Approx(0.05));
  for (size_t k = 0; k < traj.size(); ++k) {
    const Vec3 rel = traj[k].position - hyp;
    CHECK(std::hypot(rel.x(), rel.y()) == doctest::Approx(cfg.r).epsilon(1e-12));
    CHECK(traj[k].position.z() == cfg.height);
    CHECK(traj[k].time_offset == doctest::Approx(k * cfg.dt));
    // heading faces the hypothesis
    CHECK(std::abs(angle_diff(traj[k].heading, std::atan2(-rel.y(), -rel.x()))) < 1e-12);
    if (k > 0) {
      const Vec3 chord = traj[k].position - traj[k - 1].position;
      CHECK(chord.norm() == doctest::Approx(2 * cfg.r * std::sin(step / 2)).epsilon(1e-12));
      CHECK(chord.norm() == doctest::Approx(0.5999).epsilon(1e-4));
      // counterclockwise
      CHECK((traj[k - 1].position - hyp).cross(traj[k].position - hyp).z() > 0);
    }
  }
}

TEST_CASE("bias rotates the start of the trajectory") {
  FlockConfig cfg;
  const Vec3 hyp(0, 0, 0);
  const Trajectory traj = generate_encirclement_trajectory(Vec3(5, 0, 4), hyp, 0.2, cfg);
  CHECK(std::atan2(traj[0].position.y(), traj[0].position.x()) == doctest::Approx(0.2));
}

TEST_CASE("coincident agent and hypothesis default to zero azimuth") {
  FlockConfig cfg;
  const Trajectory traj = generate_encirclement_trajectory(Vec3(3, 3, 4), Vec3(3, 3, 0), 0.0, cfg);
  CHECK((traj[0].position - Vec3(3 + cfg.r, 3, cfg.height)).norm() < 1e-12);
}

TEST_CASE("uniform spacing is an equilibrium") {
  for (int n = 2; n <= 6; ++n) {
    FlockConfig cfg;
    cfg.n_agents = n;
    const Vec3 hyp(10, -4, 0);
    std::vector<PolarPos> polar;
    std::vector<Vec3> pos;
    for (int i = 0; i < n; ++i) {
      const double phi = 0.3 + kTwoPi * i / n;
      pos.push_back(hyp + Vec3(cfg.r * std::cos(phi), cfg.r * std::sin(phi), cfg.height));
      polar.push_back(to_polar(pos.back(), hyp));
    }
    std::vector<Trajectory> trajs;
    for (int i = 0; i < n; ++i) {
      std::vector<PolarPos> others;
      for (int j = 0; j < n; ++j)
        if (j != i)
          others.push_back(polar[j]);
      const double beta = bias_angle(nearest_neighbor_angle(polar[i], others), cfg);
      CHECK(beta == 0.0);
      trajs.push_back(generate_encirclement_trajectory(pos[i], hyp, beta, cfg));
    }
    for (int k = 0; k <= cfg.K; ++k)
      for (int i = 0; i < n; ++i) {
        const PolarPos a = to_polar(trajs[i][k].position, hyp);
        const PolarPos b = to_polar(trajs[(i + 1) % n][k].position, hyp);
        CHECK(std::abs(angle_diff(a.phi, b.phi)) == doctest::Approx(kTwoPi / n).epsilon(1e-9));
      }
  }
}

TEST_CASE("search paths split the area into lanes") {
  const Rect area;
  const auto one = generate_search_paths(area, 1, 25.0, 4.0);
  REQUIRE(one.size() == 1);
  // 4 lanes, two waypoints each
  CHECK(one[0].size() == 8);
  std::vector<double> xs;
  for (const auto& p : one[0])
    xs.push_back(p.x());
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  CHECK(xs == std::vector<double>{12.5, 37.5, 62.5, 87.5});

  const auto four = generate_search_paths(area, 4, 20.0, 4.0);
  REQUIRE(four.size() == 4);
  for (int i = 0; i < 4; ++i)
    for (const auto& p : four[i]) {
      CHECK(p.x() >= 25.0 * i);
      CHECK(p.x() <= 25.0 * (i + 1));
      CHECK(p.y() >= 0.0);
      CHECK(p.y() <= 100.0);
      CHECK(p.z() == 4.0);
    }
}

TEST_CASE("search lanes cover their strip") {
  const Rect area{0, 90, -10, 50};
  for (int n = 1; n <= 5; ++n)
    for (double spacing : {7.0, 15.0, 40.0}) {
      const auto paths = generate_search_paths(area, n, spacing, 4.0);
      const double strip = area.width() / n;
      for (int i = 0; i < n; ++i) {
        std::vector<double> lanes;
        for (const auto& p : paths[i])
          lanes.push_back(p.x());
        for (double x = area.x_min + i * strip; x <= area.x_min + (i + 1) * strip; x += 0.25) {
          double best = 1e9;
          for (double l : lanes)
            best = std::min(best, std::abs(x - l));
          CHECK(best <= std::max(spacing, strip) / 2 + 1e-9);
        }
      }
    }
}

TEST_CASE("wide spacing gives one center lane") {
  const auto paths = generate_search_paths(Rect{}, 2, 80.0, 4.0);
  for (int i = 0; i < 2; ++i)
    for (const auto& p : paths[i])
      CHECK(p.x() == doctest::Approx(25.0 + 50.0 * i));
}

TEST_CASE("path arc length helpers") {
  const WaypointPath path{Vec3(0, 0, 0), Vec3(0, 10, 0), Vec3(5, 10, 0)};
  CHECK(path_length(path) == doctest::Approx(15.0));
  CHECK((point_along_path(path, 12.0) - Vec3(2, 10, 0)).norm() < 1e-12);
  CHECK((point_along_path(path, -1.0) - path.front()).norm() < 1e-12);
  CHECK((point_along_path(path, 100.0) - path.back()).norm() < 1e-12);
}

TEST_CASE("search heading rotates continuously") {
  CHECK(search_heading(0.0, 0.7) == 0.0);
  CHECK(search_heading(kPi, 1.0) == doctest::Approx(kPi));
  double previous = search_heading(0.0, 0.5);
  for (double t = 0.05; t < 40; t += 0.05) {
    const double h = search_heading(t, 0.5);
    CHECK(angle_diff(previous, h) == doctest::Approx(0.025).epsilon(1e-6));
    previous = h;
  }
}

TEST_CASE("flock config validation") {
  FlockConfig cfg;
  cfg.v = 0;
  try {
    cfg.validate();
    FAIL("expected a validation error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).rfind("flock.v:", 0) == 0);
  }
  cfg = FlockConfig{};
  cfg.n_agents = 3;
  cfg.deadband = kTwoPi / 3;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
